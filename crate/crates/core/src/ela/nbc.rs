//! Nearest-better clustering statistics.
//!
//! For each point, `nn` is the distance to its nearest other point and `nb`
//! the distance to its nearest strictly better point. Points without a
//! strictly better point (the global best and anything tied with it) have
//! no `nb` and are left out of the `nb`-based statistics.

use alloc::format;
use alloc::vec::Vec;

use super::{canonical_rank, DistanceMatrix, FamilyOutput};
use crate::bbob::SampleSet;
use crate::{stats, Error, Result};

pub const NBC_NAMES: [&str; 5] =
    ["nbc.nn_nb.mean_ratio", "nbc.nn_nb.sd_ratio", "nbc.nn_nb.cor", "nbc.nb_fitness.cor", "nbc.dist_ratio.coeff_var"];

/// Per-point quantities behind the features.
#[derive(Debug, Clone, PartialEq)]
pub struct NbcDetail {
    pub nn: Vec<f64>,
    /// Distance and index of the nearest strictly better point.
    pub nb: Vec<Option<(f64, usize)>>,
    /// Number of points whose nearest better point is this one.
    pub in_degree: Vec<usize>,
    pub features: FamilyOutput,
}

pub fn nbc(sample: &SampleSet) -> Result<NbcDetail> {
    nbc_with(sample, &DistanceMatrix::new(&sample.x))
}

pub(crate) fn nbc_with(sample: &SampleSet, dist: &DistanceMatrix) -> Result<NbcDetail> {
    let n = sample.len();
    if n < 5 {
        return Err(Error::arg(format!("nearest-better clustering needs at least 5 points, got {n}")));
    }
    let y = &sample.y;
    let rank = canonical_rank(&sample.x, y);
    let mut nn = Vec::with_capacity(n);
    let mut nb = Vec::with_capacity(n);
    for i in 0..n {
        let row = dist.row(i);
        let mut best_nn = f64::INFINITY;
        let mut best_nb: Option<(f64, usize)> = None;
        for j in 0..n {
            if j == i {
                continue;
            }
            best_nn = best_nn.min(row[j]);
            if y[j] < y[i] && best_nb.is_none_or(|(d, b)| row[j] < d || (row[j] == d && rank[j] < rank[b])) {
                best_nb = Some((row[j], j));
            }
        }
        nn.push(best_nn);
        nb.push(best_nb);
    }
    let mut in_degree = alloc::vec![0usize; n];
    for t in nb.iter().flatten() {
        in_degree[t.1] += 1;
    }

    let mut out = FamilyOutput::new(&NBC_NAMES);
    let defined: Vec<usize> = (0..n).filter(|&i| nb[i].is_some()).collect();
    if defined.len() < 2 {
        out.warn("fewer than two points have a strictly better neighbour");
    } else {
        let nn_d: Vec<f64> = defined.iter().map(|&i| nn[i]).collect();
        let nb_d: Vec<f64> = defined.iter().map(|&i| nb[i].expect("defined").0).collect();
        out.set("nbc.nn_nb.mean_ratio", stats::mean(&nn_d) / stats::mean(&nb_d));
        out.set("nbc.nn_nb.sd_ratio", stats::sample_sd(&nn_d) / stats::sample_sd(&nb_d));
        match stats::pearson(&nn_d, &nb_d) {
            Some(c) => out.set("nbc.nn_nb.cor", c),
            None => out.warn("nn or nb distances have zero variance"),
        }
        let ratios: Vec<f64> = nb_d.iter().zip(&nn_d).map(|(b, a)| b / a).filter(|r| r.is_finite()).collect();
        if ratios.len() < defined.len() {
            out.warn(format!("{} duplicate points excluded from nb/nn ratios", defined.len() - ratios.len()));
        }
        if ratios.len() >= 2 {
            out.set("nbc.dist_ratio.coeff_var", stats::sample_sd(&ratios) / stats::mean(&ratios));
        }
    }
    let deg: Vec<f64> = in_degree.iter().map(|&d| d as f64).collect();
    match stats::pearson(y, &deg) {
        Some(c) => out.set("nbc.nb_fitness.cor", c),
        None => out.warn("fitness or in-degree has zero variance"),
    }
    Ok(NbcDetail { nn, nb, in_degree, features: out })
}
