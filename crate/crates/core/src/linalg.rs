//! Dense row-major matrices and the handful of factorizations the toolkit
//! needs: Gram-Schmidt orthonormalization for instance rotations and a
//! Householder QR least-squares solver for the ELA meta-models.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self { rows: rows.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics, so special-case empty column counts.
        let cols = self.cols.max(1);
        self.data.chunks_exact(cols).take(if self.cols == 0 { 0 } else { self.rows })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// `out = self * x`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (o, r) in out.iter_mut().zip(self.iter_rows()) {
            *o = r.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Orthonormalizes the rows of a square matrix with modified Gram-Schmidt.
///
/// Returns `None` when the rows are numerically dependent.
pub fn orthonormalize_rows(m: &Matrix) -> Option<Matrix> {
    let n = m.rows();
    let mut q = m.clone();
    for i in 0..n {
        for j in 0..i {
            let dot: f64 = q.row(i).iter().zip(q.row(j)).map(|(a, b)| a * b).sum();
            let (head, tail) = q.data.split_at_mut(i * q.cols);
            let rj = &head[j * m.cols..(j + 1) * m.cols];
            for (a, b) in tail[..m.cols].iter_mut().zip(rj) {
                *a -= dot * b;
            }
        }
        let norm = Float::sqrt(q.row(i).iter().map(|a| a * a).sum::<f64>());
        if !(norm > 1e-12) {
            return None;
        }
        for a in q.row_mut(i) {
            *a /= norm;
        }
    }
    Some(q)
}

/// Result of an ordinary least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LstsqFit {
    pub coef: Vec<f64>,
    pub residual_ss: f64,
}

/// Solves `min ||a * coef - b||` by Householder QR.
///
/// Returns `None` if `a` has fewer rows than columns or is numerically rank
/// deficient (a diagonal entry of R below `1e-10` times the largest one).
pub fn lstsq(a: &Matrix, b: &[f64]) -> Option<LstsqFit> {
    let (n, p) = (a.rows(), a.cols());
    if n < p || b.len() != n {
        return None;
    }
    let mut r = a.clone();
    let mut qtb = b.to_vec();
    let mut v = vec![0.0; n];
    for k in 0..p {
        let norm = Float::sqrt((k..n).map(|i| r[(i, k)] * r[(i, k)]).sum::<f64>());
        if norm == 0.0 {
            return None;
        }
        let alpha = if r[(k, k)] > 0.0 { -norm } else { norm };
        for i in k..n {
            v[i] = r[(i, k)];
        }
        v[k] -= alpha;
        let vnorm2: f64 = (k..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 > 0.0 {
            for j in k..p {
                let s: f64 = (k..n).map(|i| v[i] * r[(i, j)]).sum::<f64>() * 2.0 / vnorm2;
                for i in k..n {
                    r[(i, j)] -= s * v[i];
                }
            }
            let s: f64 = (k..n).map(|i| v[i] * qtb[i]).sum::<f64>() * 2.0 / vnorm2;
            for i in k..n {
                qtb[i] -= s * v[i];
            }
        }
    }
    let max_diag = (0..p).map(|k| Float::abs(r[(k, k)])).fold(0.0, f64::max);
    if (0..p).any(|k| Float::abs(r[(k, k)]) <= 1e-10 * max_diag) {
        return None;
    }
    let mut coef = vec![0.0; p];
    for k in (0..p).rev() {
        let s: f64 = ((k + 1)..p).map(|j| r[(k, j)] * coef[j]).sum();
        coef[k] = (qtb[k] - s) / r[(k, k)];
    }
    let residual_ss = crate::stats::sum(qtb[p..].iter().map(|x| x * x));
    Some(LstsqFit { coef, residual_ss })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_gives_orthonormal_rows() {
        let m = Matrix::from_rows(&[[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]]);
        let q = orthonormalize_rows(&m).unwrap();
        let qqt = q.matmul(&q.transpose());
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qqt[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dependent_rows_rejected() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(orthonormalize_rows(&m).is_none());
    }

    #[test]
    fn lstsq_exact_line() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]]);
        let fit = lstsq(&a, &[3.0, 5.0, 7.0, 9.0]).unwrap();
        assert!((fit.coef[0] - 3.0).abs() < 1e-12);
        assert!((fit.coef[1] - 2.0).abs() < 1e-12);
        assert!(fit.residual_ss < 1e-20);
    }

    #[test]
    fn lstsq_rank_deficient() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]);
        assert!(lstsq(&a, &[1.0, 2.0, 3.0]).is_none());
    }
}
