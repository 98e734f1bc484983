//! Spread of the best sample points relative to the whole sample.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;

use super::{canonical_rank, DistanceMatrix, FamilyOutput};
use crate::bbob::SampleSet;
use crate::{stats, Error, Result};

pub const DISPERSION_NAMES: [&str; 6] = [
    "disp.diff_mean_02",
    "disp.diff_mean_05",
    "disp.diff_mean_10",
    "disp.diff_mean_25",
    "disp.ratio_mean_02",
    "disp.ratio_mean_10",
];

const MIN_POINTS: usize = 50;

fn mean_pairwise(dist: &DistanceMatrix, idx: &[usize]) -> f64 {
    if idx.len() < 2 {
        return 0.0;
    }
    let pairs = idx.iter().enumerate().flat_map(|(a, &i)| idx[a + 1..].iter().map(move |&j| dist.get(i, j)));
    let m = idx.len();
    stats::sum(pairs) / (m * (m - 1) / 2) as f64
}

/// The `ceil(q n)` best points, ties by `rank`.
fn best_subset(y: &[f64], rank: &[usize], q: f64) -> Vec<usize> {
    let n = y.len();
    let m = (Float::ceil(q * n as f64 - 1e-9) as usize).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(rank[a].cmp(&rank[b])));
    order.truncate(m);
    order
}

fn at(dist: &DistanceMatrix, y: &[f64], rank: &[usize], q: f64, all: f64) -> (f64, f64) {
    let sub = mean_pairwise(dist, &best_subset(y, rank, q));
    (sub - all, sub / all)
}

/// `(diff_mean, ratio_mean)` for an arbitrary fraction `q`.
pub fn dispersion_at(sample: &SampleSet, q: f64) -> Result<(f64, f64)> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::arg("fraction must lie in (0, 1]"));
    }
    let dist = DistanceMatrix::new(&sample.x);
    let all: Vec<usize> = (0..sample.len()).collect();
    let rank = canonical_rank(&sample.x, &sample.y);
    Ok(at(&dist, &sample.y, &rank, q, mean_pairwise(&dist, &all)))
}

pub fn dispersion(sample: &SampleSet) -> Result<FamilyOutput> {
    dispersion_with(sample, &DistanceMatrix::new(&sample.x))
}

pub(crate) fn dispersion_with(sample: &SampleSet, dist: &DistanceMatrix) -> Result<FamilyOutput> {
    let n = sample.len();
    if n < MIN_POINTS {
        return Err(Error::arg(format!("dispersion needs at least {MIN_POINTS} points, got {n}")));
    }
    let all: Vec<usize> = (0..n).collect();
    let total = mean_pairwise(dist, &all);
    let mut out = FamilyOutput::new(&DISPERSION_NAMES);
    if total == 0.0 {
        out.warn("all points coincide");
        return Ok(out);
    }
    let rank = canonical_rank(&sample.x, &sample.y);
    for (q, diff, ratio) in [
        (0.02, "disp.diff_mean_02", Some("disp.ratio_mean_02")),
        (0.05, "disp.diff_mean_05", None),
        (0.10, "disp.diff_mean_10", Some("disp.ratio_mean_10")),
        (0.25, "disp.diff_mean_25", None),
    ] {
        let (d, r) = at(dist, &sample.y, &rank, q, total);
        out.set(diff, d);
        if let Some(name) = ratio {
            out.set(name, r);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbob::{sample_unit_points, SamplingMethod};
    use crate::linalg::Matrix;

    fn points(n: usize, seed: u64) -> Matrix {
        let u = sample_unit_points(n, 2, seed, SamplingMethod::Uniform).unwrap();
        Matrix::from_vec(n, 2, u.as_slice().iter().map(|v| 10.0 * v - 5.0).collect())
    }

    #[test]
    fn subset_sizes() {
        let y: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let id: Vec<usize> = (0..60).collect();
        assert_eq!(best_subset(&y, &id, 0.02), alloc::vec![0]);
        assert_eq!(best_subset(&y, &id, 0.05).len(), 3);
        assert_eq!(best_subset(&y, &id, 0.10).len(), 5);
        assert_eq!(best_subset(&y, &id, 0.25).len(), 13);
        let rev: Vec<usize> = (0..60).rev().collect();
        assert_eq!(best_subset(&[1.0; 60], &rev, 0.10), (54..60).rev().collect::<Vec<_>>());
    }

    #[test]
    fn whole_sample_hook() {
        let x = points(60, 1);
        let y = x.iter_rows().map(|r| r[0]).collect();
        let (d, r) = dispersion_at(&SampleSet::new(x, y).unwrap(), 1.0).unwrap();
        assert!(d.abs() < 1e-12);
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clustered_best_points() {
        let x = points(100, 2);
        // Best values near the (-5, -5) corner.
        let y = x.iter_rows().map(|r| (r[0] + 5.0).hypot(r[1] + 5.0)).collect();
        let out = dispersion(&SampleSet::new(x, y).unwrap()).unwrap();
        assert!(out.get("disp.diff_mean_10").unwrap() < 0.0);
        assert!(out.get("disp.ratio_mean_10").unwrap() < 1.0);
    }

    #[test]
    fn too_few_points() {
        let x = points(49, 3);
        let y = alloc::vec![0.0; 49];
        assert!(dispersion(&SampleSet::new(x, y).unwrap()).is_err());
    }
}
