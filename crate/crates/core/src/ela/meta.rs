//! Linear and pure-quadratic least-squares meta-models.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;

use super::FamilyOutput;
use crate::bbob::SampleSet;
use crate::linalg::{lstsq, Matrix};
use crate::{stats, Error, Result};

pub const META_NAMES: [&str; 4] = [
    "ela_meta.lin_simple.adj_r2",
    "ela_meta.lin_simple.coef.max_by_min",
    "ela_meta.quad_simple.adj_r2",
    "ela_meta.quad_simple.cond",
];

fn design(x: &Matrix, squares: bool) -> Matrix {
    let (n, d) = (x.rows(), x.cols());
    let cols = if squares { 1 + 2 * d } else { 1 + d };
    let mut data = Vec::with_capacity(n * cols);
    for row in x.iter_rows() {
        data.push(1.0);
        data.extend_from_slice(row);
        if squares {
            data.extend(row.iter().map(|v| v * v));
        }
    }
    Matrix::from_vec(n, cols, data)
}

fn abs_ratio(coefs: &[f64]) -> f64 {
    let abs = coefs.iter().map(|c| Float::abs(*c));
    let max = abs.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = abs.fold(f64::INFINITY, f64::min);
    max / min
}

pub fn ela_meta(sample: &SampleSet) -> Result<FamilyOutput> {
    let (n, d) = (sample.len(), sample.dim());
    if n <= 2 * d + 2 {
        return Err(Error::arg(format!("meta-models need more than {} points, got {n}", 2 * d + 2)));
    }
    let mut out = FamilyOutput::new(&META_NAMES);
    let y = &sample.y;
    let ybar = stats::mean(y);
    let tss = stats::sum(y.iter().map(|v| (v - ybar) * (v - ybar)));
    let adj = |rss: f64, predictors: usize| {
        let r2 = 1.0 - rss / tss;
        1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n as f64 - predictors as f64 - 1.0)
    };
    if tss == 0.0 {
        out.warn("constant objective values; adjusted R2 undefined");
    }
    match lstsq(&design(&sample.x, false), y) {
        Some(fit) => {
            if tss > 0.0 {
                out.set("ela_meta.lin_simple.adj_r2", adj(fit.residual_ss, d));
            }
            out.set("ela_meta.lin_simple.coef.max_by_min", abs_ratio(&fit.coef[1..]));
        }
        None => out.warn("linear design is rank deficient"),
    }
    match lstsq(&design(&sample.x, true), y) {
        Some(fit) => {
            if tss > 0.0 {
                out.set("ela_meta.quad_simple.adj_r2", adj(fit.residual_ss, 2 * d));
            }
            out.set("ela_meta.quad_simple.cond", abs_ratio(&fit.coef[1 + d..]));
        }
        None => out.warn("quadratic design is rank deficient"),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbob::{sample_unit_points, SamplingMethod};
    use crate::seed::rng_for;
    use alloc::vec;
    use rand::Rng as _;

    fn box_points(n: usize, d: usize, seed: u64) -> Matrix {
        let u = sample_unit_points(n, d, seed, SamplingMethod::Uniform).unwrap();
        Matrix::from_vec(n, d, u.as_slice().iter().map(|v| 10.0 * v - 5.0).collect())
    }

    #[test]
    fn exact_linear() {
        let x = box_points(30, 1, 1);
        let y = x.iter_rows().map(|r| 3.0 + 2.0 * r[0]).collect();
        let out = ela_meta(&SampleSet::new(x, y).unwrap()).unwrap();
        assert!((out.get("ela_meta.lin_simple.adj_r2").unwrap() - 1.0).abs() < 1e-12);
        assert!((out.get("ela_meta.lin_simple.coef.max_by_min").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_sphere() {
        let x = box_points(60, 3, 2);
        let c = [0.5, -1.0, 2.0];
        let y = x.iter_rows().map(|r| r.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum()).collect();
        let out = ela_meta(&SampleSet::new(x, y).unwrap()).unwrap();
        assert!((out.get("ela_meta.quad_simple.adj_r2").unwrap() - 1.0).abs() < 1e-12);
        assert!((out.get("ela_meta.quad_simple.cond").unwrap() - 1.0).abs() < 1e-9);
    }

    /// Solves the normal equations by Gaussian elimination with partial pivoting.
    fn normal_equations(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let p = a[0].len();
        let mut m = vec![vec![0.0; p + 1]; p];
        for (row, yi) in a.iter().zip(y) {
            for i in 0..p {
                for j in 0..p {
                    m[i][j] += row[i] * row[j];
                }
                m[i][p] += row[i] * yi;
            }
        }
        for k in 0..p {
            let piv = (k..p).max_by(|&i, &j| m[i][k].abs().partial_cmp(&m[j][k].abs()).unwrap()).unwrap();
            m.swap(k, piv);
            for i in k + 1..p {
                let f = m[i][k] / m[k][k];
                for j in k..=p {
                    m[i][j] -= f * m[k][j];
                }
            }
        }
        let mut b = vec![0.0; p];
        for k in (0..p).rev() {
            let s: f64 = (k + 1..p).map(|j| m[k][j] * b[j]).sum();
            b[k] = (m[k][p] - s) / m[k][k];
        }
        b
    }

    #[test]
    fn noisy_plane_matches_normal_equations() {
        let x = box_points(20, 2, 3);
        let mut rng = rng_for(99, &[]);
        let y: Vec<f64> = x.iter_rows().map(|r| r[0] + 4.0 * r[1] + rng.random_range(-0.5..0.5)).collect();
        let rows: Vec<Vec<f64>> = x.iter_rows().map(|r| vec![1.0, r[0], r[1]]).collect();
        let b = normal_equations(&rows, &y);
        let rss: f64 = rows
            .iter()
            .zip(&y)
            .map(|(r, yi)| {
                let e = yi - (b[0] + b[1] * r[1] + b[2] * r[2]);
                e * e
            })
            .sum();
        let ybar = y.iter().sum::<f64>() / 20.0;
        let tss: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
        let adj = 1.0 - (rss / tss) * 19.0 / 17.0;
        let ratio = b[1].abs().max(b[2].abs()) / b[1].abs().min(b[2].abs());
        let out = ela_meta(&SampleSet::new(x, y).unwrap()).unwrap();
        assert!((out.get("ela_meta.lin_simple.adj_r2").unwrap() - adj).abs() < 1e-9);
        assert!((out.get("ela_meta.lin_simple.coef.max_by_min").unwrap() - ratio).abs() < 1e-9);
    }

    #[test]
    fn preconditions_and_rank_deficiency() {
        let x = box_points(6, 2, 4);
        let y = vec![1.0; 6];
        assert!(ela_meta(&SampleSet::new(x, y).unwrap()).is_err());
        // Every point on one vertical line: the x1 column is collinear with the intercept.
        let x = Matrix::from_vec(10, 2, (0..10).flat_map(|i| [1.0, i as f64]).collect());
        let y = (0..10).map(|i| i as f64).collect();
        let out = ela_meta(&SampleSet::new(x, y).unwrap()).unwrap();
        assert!(out.get("ela_meta.lin_simple.adj_r2").unwrap().is_nan());
        assert!(out.warnings.iter().any(|w| w.contains("rank deficient")));
    }
}
