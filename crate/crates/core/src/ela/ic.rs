//! Information content of the fitness sequence along a nearest-neighbour tour.
//!
//! Slopes between consecutive tour points are symbolized with a sensitivity
//! `eps` into {-1, 0, 1}. `H(eps)` is the base-6 entropy of the unequal
//! consecutive symbol pairs and `M(eps)` the length of the symbol string
//! after dropping zeros and collapsing repeats, relative to the number of
//! slopes.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng as _;

use super::{canonical_rank, DistanceMatrix, FamilyOutput};
use crate::bbob::SampleSet;
use crate::linalg::Matrix;
use crate::seed::rng_for;
use crate::{Error, Result};

pub const IC_NAMES: [&str; 5] = ["ic.h_max", "ic.eps_s", "ic.eps_max", "ic.eps_ratio", "ic.m0"];

const H_THRESHOLD: f64 = 0.05;

/// `0` followed by `10^k` for `k = -5, -4.98, ..., 15`.
pub fn epsilon_grid() -> Vec<f64> {
    let mut g = Vec::with_capacity(1002);
    g.push(0.0);
    g.extend((0..=1000).map(|j| Float::powf(10.0, (j as f64 - 250.0) / 50.0)));
    g
}

#[inline]
fn symbol(s: f64, eps: f64) -> i8 {
    if s > eps {
        1
    } else if s < -eps {
        -1
    } else {
        0
    }
}

/// Entropy of the unequal consecutive symbol pairs.
pub fn entropy_at(slopes: &[f64], eps: f64) -> f64 {
    if slopes.len() < 2 {
        return 0.0;
    }
    let mut counts = [0usize; 9];
    let mut prev = symbol(slopes[0], eps);
    for &s in &slopes[1..] {
        let cur = symbol(s, eps);
        if cur != prev {
            counts[((prev + 1) * 3 + (cur + 1)) as usize] += 1;
        }
        prev = cur;
    }
    let pairs = (slopes.len() - 1) as f64;
    let ln6 = Float::ln(6.0);
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / pairs;
            p * Float::ln(p) / ln6
        })
        .sum::<f64>()
}

/// Partial information: collapsed non-zero symbol count over the slope count.
pub fn partial_information_at(slopes: &[f64], eps: f64) -> f64 {
    if slopes.is_empty() {
        return 0.0;
    }
    let mut len = 0usize;
    let mut last = 0i8;
    for &s in slopes {
        let c = symbol(s, eps);
        if c != 0 && c != last {
            len += 1;
            last = c;
        }
    }
    len as f64 / slopes.len() as f64
}

/// Features from an explicit slope sequence.
pub fn ic_from_slopes(slopes: &[f64]) -> FamilyOutput {
    let mut out = FamilyOutput::new(&IC_NAMES);
    if slopes.len() < 2 {
        out.warn(format!("only {} usable tour transitions", slopes.len()));
        return out;
    }
    let grid = epsilon_grid();
    let h: Vec<f64> = grid.iter().map(|&e| entropy_at(slopes, e)).collect();
    let m: Vec<f64> = grid.iter().map(|&e| partial_information_at(slopes, e)).collect();
    let h_max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let i_max = h.iter().position(|&v| v == h_max).expect("non-empty grid");
    out.set("ic.h_max", h_max);
    out.set("ic.eps_max", grid[i_max]);
    match (1..grid.len()).find(|&i| h[i] < H_THRESHOLD) {
        Some(i) => out.set("ic.eps_s", Float::log10(grid[i])),
        None => out.warn("entropy never settles on the sensitivity grid"),
    }
    let m0 = m[0];
    out.set("ic.m0", m0);
    match (1..grid.len()).find(|&i| m[i] <= 0.5 * m0) {
        Some(i) => out.set("ic.eps_ratio", Float::log10(grid[i])),
        None => out.warn("partial information never halves on the sensitivity grid"),
    }
    out
}

fn tour_with(x: &Matrix, y: &[f64], dist: &DistanceMatrix, seed: u64) -> Vec<usize> {
    let n = x.rows();
    if n == 0 {
        return Vec::new();
    }
    let rank = canonical_rank(x, y);
    let mut order = alloc::vec![0usize; n];
    for (i, &r) in rank.iter().enumerate() {
        order[r] = i;
    }
    let mut visited = alloc::vec![false; n];
    let mut cur = order[rng_for(seed, &[]).random_range(0..n)];
    let mut tour = Vec::with_capacity(n);
    visited[cur] = true;
    tour.push(cur);
    for _ in 1..n {
        let row = dist.row(cur);
        let next = (0..n)
            .filter(|&j| !visited[j])
            .min_by(|&a, &b| row[a].total_cmp(&row[b]).then(rank[a].cmp(&rank[b])))
            .expect("unvisited point remains");
        visited[next] = true;
        tour.push(next);
        cur = next;
    }
    tour
}

/// Nearest-neighbour tour over all rows from a seeded start.
///
/// The start and the tie-breaks use the points' sorted order, so the tour
/// visits the same points in the same order whatever the row order.
pub fn nn_tour(x: &Matrix, y: &[f64], seed: u64) -> Vec<usize> {
    tour_with(x, y, &DistanceMatrix::new(x), seed)
}

/// Slopes along `tour`; coincident consecutive points are skipped.
pub fn tour_slopes(x: &Matrix, y: &[f64], tour: &[usize]) -> Vec<f64> {
    tour.windows(2)
        .filter_map(|w| {
            let d = Float::sqrt(x.row(w[0]).iter().zip(x.row(w[1])).map(|(a, b)| (a - b) * (a - b)).sum::<f64>());
            (d > 0.0).then(|| (y[w[1]] - y[w[0]]) / d)
        })
        .collect()
}

pub fn info_content(sample: &SampleSet, tour_seed: u64) -> Result<FamilyOutput> {
    info_content_with(sample, &DistanceMatrix::new(&sample.x), tour_seed)
}

pub(crate) fn info_content_with(sample: &SampleSet, dist: &DistanceMatrix, tour_seed: u64) -> Result<FamilyOutput> {
    let n = sample.len();
    if n < 10 {
        return Err(Error::arg(format!("information content needs at least 10 points, got {n}")));
    }
    let first = sample.x.row(0);
    if sample.x.iter_rows().all(|r| r == first) {
        return Err(Error::arg("information content needs two distinct points"));
    }
    let tour = tour_with(&sample.x, &sample.y, dist, tour_seed);
    let slopes = tour_slopes(&sample.x, &sample.y, &tour);
    let mut out = ic_from_slopes(&slopes);
    if slopes.len() < n - 1 {
        out.warn(format!("{} coincident tour steps skipped", n - 1 - slopes.len()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn grid_shape() {
        let g = epsilon_grid();
        assert_eq!(g.len(), 1002);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1], 1e-5);
        assert_eq!(g[251], 1.0);
        assert_eq!(g[1001], 1e15);
    }

    #[test]
    fn increasing_line() {
        let n = 12;
        let x = Matrix::from_vec(n, 1, (0..n).map(|i| i as f64).collect());
        let y: Vec<f64> = (0..n).map(|i| 3.0 * i as f64).collect();
        let s = SampleSet::new(x, y).unwrap();
        // Start at an end so the tour walks the line in one direction.
        let tour = nn_tour(&s.x, &s.y, 0);
        let slopes = tour_slopes(&s.x, &s.y, &tour);
        assert_eq!(slopes.len(), n - 1);
        if tour[0] == 0 {
            let out = ic_from_slopes(&slopes);
            assert_eq!(out.get("ic.h_max"), Some(0.0));
            assert_eq!(out.get("ic.m0"), Some(1.0 / (n - 1) as f64));
        }
        let fixed = vec![2.0; n - 1];
        let out = ic_from_slopes(&fixed);
        assert_eq!(entropy_at(&fixed, 0.0), 0.0);
        assert_eq!(out.get("ic.h_max"), Some(0.0));
        assert_eq!(out.get("ic.m0"), Some(1.0 / (n - 1) as f64));
    }

    #[test]
    fn constant_values() {
        let x = Matrix::from_vec(10, 1, (0..10).map(|i| i as f64).collect());
        let out = info_content(&SampleSet::new(x, vec![2.0; 10]).unwrap(), 1).unwrap();
        assert_eq!(out.get("ic.h_max"), Some(0.0));
        assert_eq!(out.get("ic.m0"), Some(0.0));
    }

    #[test]
    fn vanishes_for_large_eps() {
        let slopes = [3.0, -2.0, 5.0, -1e4, 0.1, 7.0];
        assert_eq!(entropy_at(&slopes, 1e15), 0.0);
        assert_eq!(partial_information_at(&slopes, 1e15), 0.0);
    }

    #[test]
    fn tour_ignores_row_order() {
        let pts = [[0.3, 1.0], [2.0, -1.0], [-3.0, 0.5], [1.0, 1.0], [0.0, 0.0], [4.0, 4.0]];
        let y = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x = Matrix::from_rows(&pts);
        let perm = [3, 0, 5, 1, 4, 2];
        let xp = Matrix::from_rows(&perm.map(|i| pts[i]));
        let yp = perm.map(|i| y[i]);
        for seed in 0..5 {
            let a: Vec<usize> = nn_tour(&x, &y, seed);
            let b: Vec<usize> = nn_tour(&xp, &yp, seed).iter().map(|&i| perm[i]).collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn preconditions() {
        let x = Matrix::zeros(10, 2);
        assert!(info_content(&SampleSet::new(x, vec![0.0; 10]).unwrap(), 1).is_err());
        let x = Matrix::from_vec(9, 1, (0..9).map(|i| i as f64).collect());
        assert!(info_content(&SampleSet::new(x, vec![0.0; 9]).unwrap(), 1).is_err());
    }
}
