//! Neighbourhood structure for the Star, Ring and Von Neumann topologies.
//!
//! Ring neighbourhoods are the `k` nearest particles under a Minkowski
//! `p`-norm, where each particle is its own first neighbour. Von Neumann
//! reuses that mechanism with `k` given by a Delannoy number of the problem
//! dimension and the range `r`, frozen after initialization.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::Float;

use crate::linalg::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodGraph {
    /// Per particle, its neighbours; the particle itself comes first.
    pub neighbors: Vec<Vec<usize>>,
    /// Whether the graph stays fixed after initialization.
    pub is_static: bool,
}

impl NeighborhoodGraph {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Edge list `(particle, neighbor)` in particle order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors.iter().enumerate().flat_map(|(i, ns)| ns.iter().map(move |&j| (i, j)))
    }
}

/// Delannoy number `D(m, n)`, saturating at `u64::MAX`.
pub fn delannoy(m: usize, n: usize) -> u64 {
    // Row-by-row recurrence D(i,j) = D(i-1,j) + D(i,j-1) + D(i-1,j-1).
    let mut prev = alloc::vec![1u64; n + 1];
    for _ in 0..m {
        let mut cur = alloc::vec![1u64; n + 1];
        for j in 1..=n {
            cur[j] = prev[j].saturating_add(cur[j - 1]).saturating_add(prev[j - 1]);
        }
        prev = cur;
    }
    prev[n]
}

/// Von Neumann neighbourhood size: `min(D(dim, r), n_particles)`, at least 1.
pub fn von_neumann_k(dim: usize, r: usize, n_particles: usize) -> usize {
    let d = delannoy(dim, r);
    let k = usize::try_from(d).unwrap_or(usize::MAX).min(n_particles);
    k.max(1)
}

/// Minkowski distance raised to the `p`-th power (order-equivalent to the norm).
#[inline]
fn minkowski_pow(a: &[f64], b: &[f64], p: u32) -> f64 {
    match p {
        1 => a.iter().zip(b).map(|(x, y)| Float::abs(x - y)).sum(),
        2 => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
        _ => a.iter().zip(b).map(|(x, y)| Float::powi(Float::abs(x - y), p as i32)).sum(),
    }
}

/// `k`-nearest-neighbour graph under the Minkowski `p`-norm.
///
/// Each list starts with the particle itself, followed by the `k - 1`
/// closest others in order of distance; ties go to the lower index.
pub fn ring_neighbors(positions: &Matrix, k: usize, p: u32) -> Result<NeighborhoodGraph> {
    let n = positions.rows();
    if k < 1 || k > n {
        return Err(Error::arg(format!("k must be in 1..={n}, got {k}")));
    }
    if p < 1 {
        return Err(Error::arg("Minkowski order must be >= 1"));
    }
    let mut neighbors = Vec::with_capacity(n);
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        let xi = positions.row(i);
        cand.clear();
        cand.extend((0..n).filter(|&j| j != i).map(|j| (minkowski_pow(xi, positions.row(j), p), j)));
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        let take = k - 1;
        if take > 0 && take < cand.len() {
            cand.select_nth_unstable_by(take - 1, by_dist);
            cand.truncate(take);
        }
        cand.sort_unstable_by(by_dist);
        let mut list = Vec::with_capacity(k);
        list.push(i);
        list.extend(cand.iter().take(take).map(|c| c.1));
        neighbors.push(list);
    }
    Ok(NeighborhoodGraph { neighbors, is_static: false })
}

/// Fully connected graph.
pub fn star_neighbors(n_particles: usize) -> NeighborhoodGraph {
    let neighbors = (0..n_particles)
        .map(|i| {
            let mut l = Vec::with_capacity(n_particles);
            l.push(i);
            l.extend((0..n_particles).filter(|&j| j != i));
            l
        })
        .collect();
    NeighborhoodGraph { neighbors, is_static: true }
}

/// For each particle, the index of its neighbourhood's best personal best.
pub fn local_best(graph: &NeighborhoodGraph, pbest_values: &[f64]) -> Result<Vec<usize>> {
    if graph.len() != pbest_values.len() {
        return Err(Error::arg(format!(
            "graph has {} particles but {} values were given",
            graph.len(),
            pbest_values.len()
        )));
    }
    graph
        .neighbors
        .iter()
        .map(|ns| {
            ns.iter()
                .copied()
                .min_by(|&a, &b| {
                    pbest_values[a].partial_cmp(&pbest_values[b]).unwrap_or(Ordering::Equal).then(a.cmp(&b))
                })
                .ok_or_else(|| Error::integrity("empty neighbour list"))
        })
        .collect()
}

/// Index of the smallest value, lowest index on ties.
pub fn argmin(values: &[f64]) -> Option<usize> {
    (0..values.len()).min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
}
