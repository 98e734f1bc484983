//! Exploratory landscape analysis features of a sampled problem.
//!
//! Five families are computed: meta-model fits, the objective value
//! distribution, nearest-better clustering, dispersion and information
//! content. A family whose precondition fails yields NaN columns and a
//! warning instead of aborting the whole vector.

mod dispersion;
mod distr;
mod ic;
mod meta;
mod nbc;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;

use crate::bbob::{SampleProvenance, SampleSet};
use crate::linalg::Matrix;
use crate::Result;

pub use dispersion::{dispersion, dispersion_at, DISPERSION_NAMES};
pub use distr::{ela_distr, kurtosis, number_of_peaks, skewness, DISTR_NAMES};
pub use ic::{
    entropy_at, epsilon_grid, ic_from_slopes, info_content, nn_tour, partial_information_at, tour_slopes, IC_NAMES,
};
pub use meta::{ela_meta, META_NAMES};
pub use nbc::{nbc, NbcDetail, NBC_NAMES};

/// Canonical feature keys, in column order.
pub const FEATURE_NAMES: [&str; 23] = [
    "ela_meta.lin_simple.adj_r2",
    "ela_meta.lin_simple.coef.max_by_min",
    "ela_meta.quad_simple.adj_r2",
    "ela_meta.quad_simple.cond",
    "ela_distr.skewness",
    "ela_distr.kurtosis",
    "ela_distr.number_of_peaks",
    "nbc.nn_nb.mean_ratio",
    "nbc.nn_nb.sd_ratio",
    "nbc.nn_nb.cor",
    "nbc.nb_fitness.cor",
    "nbc.dist_ratio.coeff_var",
    "disp.diff_mean_02",
    "disp.diff_mean_05",
    "disp.diff_mean_10",
    "disp.diff_mean_25",
    "disp.ratio_mean_02",
    "disp.ratio_mean_10",
    "ic.h_max",
    "ic.eps_s",
    "ic.eps_max",
    "ic.eps_ratio",
    "ic.m0",
];

/// Values of one feature family together with anything worth reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyOutput {
    pub names: &'static [&'static str],
    pub values: Vec<f64>,
    pub warnings: Vec<String>,
}

impl FamilyOutput {
    pub(crate) fn new(names: &'static [&'static str]) -> Self {
        FamilyOutput { names, values: alloc::vec![f64::NAN; names.len()], warnings: Vec::new() }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| *n == name).map(|i| self.values[i])
    }

    pub(crate) fn set(&mut self, name: &str, v: f64) {
        let i = self.names.iter().position(|n| *n == name).expect("known feature name");
        self.values[i] = v;
    }

    pub(crate) fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }
}

/// All canonical features for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ElaVector {
    pub values: [f64; 23],
    pub provenance: Option<SampleProvenance>,
    pub warnings: Vec<String>,
}

impl ElaVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES.iter().position(|n| *n == name).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        FEATURE_NAMES.iter().copied().zip(self.values.iter().copied())
    }

    fn absorb(&mut self, family: &str, out: Result<FamilyOutput>, names: &'static [&'static str]) {
        match out {
            Ok(f) => {
                for (n, v) in f.names.iter().zip(&f.values) {
                    let i = FEATURE_NAMES.iter().position(|c| c == n).expect("canonical name");
                    self.values[i] = *v;
                }
                self.warnings.extend(f.warnings.into_iter().map(|w| format!("{family}: {w}")));
            }
            Err(e) => {
                for n in names {
                    let i = FEATURE_NAMES.iter().position(|c| c == n).expect("canonical name");
                    self.values[i] = f64::NAN;
                }
                self.warnings.push(format!("{family}: {e}"));
            }
        }
    }
}

/// Computes every family on `sample`. The information-content tour start
/// is derived from `tour_seed`.
pub fn compute_ela(sample: &SampleSet, tour_seed: u64) -> ElaVector {
    let mut v = ElaVector { values: [f64::NAN; 23], provenance: sample.provenance, warnings: Vec::new() };
    let dist = DistanceMatrix::new(&sample.x);
    v.absorb("ela_meta", ela_meta(sample), &META_NAMES);
    v.absorb("ela_distr", ela_distr(sample), &DISTR_NAMES);
    v.absorb("nbc", nbc::nbc_with(sample, &dist).map(|d| d.features), &NBC_NAMES);
    v.absorb("disp", dispersion::dispersion_with(sample, &dist), &DISPERSION_NAMES);
    v.absorb("ic", ic::info_content_with(sample, &dist, tour_seed), &IC_NAMES);
    v
}

/// Position of each row when rows are sorted by coordinates, then value,
/// then index. Tie-breaks use it so that features do not depend on row order.
pub(crate) fn canonical_rank(x: &Matrix, y: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.rows()).collect();
    order.sort_by(|&a, &b| {
        x.row(a)
            .iter()
            .zip(x.row(b))
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(y[a].total_cmp(&y[b]))
            .then(a.cmp(&b))
    });
    let mut rank = alloc::vec![0usize; order.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

/// Symmetric Euclidean distances between sample rows.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(x: &Matrix) -> Self {
        let n = x.rows();
        let mut d = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let s: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                let v = Float::sqrt(s);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        DistanceMatrix { n, d }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbob::{make_instance, sample_instance, SamplingMethod};

    #[test]
    fn names_partition_the_vector() {
        let mut all: Vec<&str> = Vec::new();
        for names in [&META_NAMES[..], &DISTR_NAMES, &NBC_NAMES, &DISPERSION_NAMES, &IC_NAMES] {
            all.extend_from_slice(names);
        }
        assert_eq!(all, FEATURE_NAMES);
    }

    #[test]
    fn small_sample_keeps_other_families() {
        let inst = make_instance(1, 1, 2).unwrap();
        let s = sample_instance(&inst, 10, 1, SamplingMethod::LatinHypercube).unwrap();
        let v = compute_ela(&s, 3);
        assert!(v.get("disp.diff_mean_02").unwrap().is_nan());
        assert!(v.warnings.iter().any(|w| w.starts_with("disp:")));
        assert!(v.get("ela_distr.skewness").unwrap().is_finite());
        assert!(v.get("nbc.nn_nb.cor").unwrap().is_finite());
    }

    #[test]
    fn sphere_vector_is_finite() {
        let inst = make_instance(1, 1, 3).unwrap();
        let s = sample_instance(&inst, 200, 7, SamplingMethod::LatinHypercube).unwrap();
        let v = compute_ela(&s, 7);
        for (name, value) in v.iter() {
            if name != "ela_meta.lin_simple.coef.max_by_min" {
                assert!(value.is_finite(), "{name} = {value}");
            }
        }
        assert!(v.get("ela_meta.quad_simple.adj_r2").unwrap() > 0.999);
        assert!(v.get("ic.m0").unwrap() <= 1.0);
        assert_eq!(compute_ela(&s, 7), v);
    }
}
