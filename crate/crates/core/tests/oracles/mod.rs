//! Independent reference implementations used by the integration and
//! acceptance tests. They favour directness over speed.
#![allow(dead_code)]

use psox_core::explain::{ForestModel, Node, TreeModel};

/// AOCC written out term by term with lb = -5, ub = 5.
pub fn direct_aocc(y: &[f64]) -> f64 {
    let (lb, ub) = (-5.0f64, 5.0f64);
    let mut total = 0.0;
    for &yi in y {
        let clamped = yi.max(lb).min(ub);
        total += 1.0 - (clamped - lb) / (ub - lb);
    }
    total / y.len() as f64
}

/// Expected tree output when only the features in `mask` are known: known
/// features are followed, unknown ones average both children by cover.
pub fn conditional_expectation(tree: &TreeModel, node: usize, x: &[f64], mask: u32) -> f64 {
    match &tree.nodes[node] {
        Node::Leaf { value, .. } => *value,
        Node::Split { feature, threshold, left, right, cover } => {
            if mask & (1 << feature) != 0 {
                let next = if x[*feature] <= *threshold { *left } else { *right };
                conditional_expectation(tree, next, x, mask)
            } else {
                let cl = tree.nodes[*left].cover() as f64;
                let cr = tree.nodes[*right].cover() as f64;
                let c = *cover as f64;
                cl / c * conditional_expectation(tree, *left, x, mask)
                    + cr / c * conditional_expectation(tree, *right, x, mask)
            }
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Shapley values by enumerating every feature subset.
pub fn brute_shapley_tree(tree: &TreeModel, x: &[f64]) -> Vec<f64> {
    let m = x.len();
    let v = |mask: u32| conditional_expectation(tree, 0, x, mask);
    let mut phi = vec![0.0; m];
    for (i, p) in phi.iter_mut().enumerate() {
        for mask in 0u32..(1 << m) {
            if mask & (1 << i) != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let weight = factorial(s) * factorial(m - s - 1) / factorial(m);
            *p += weight * (v(mask | (1 << i)) - v(mask));
        }
    }
    phi
}

pub fn brute_shapley_forest(forest: &ForestModel, x: &[f64]) -> Vec<f64> {
    let mut phi = vec![0.0; x.len()];
    for t in &forest.trees {
        for (p, v) in phi.iter_mut().zip(brute_shapley_tree(t, x)) {
            *p += v;
        }
    }
    let n = forest.trees.len() as f64;
    phi.iter().map(|p| p / n).collect()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
}

fn cor(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let da: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let db: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    num / (da * db).sqrt()
}

/// `[mean_ratio, sd_ratio, nn_nb.cor, nb_fitness.cor, dist_ratio.coeff_var]`.
pub fn nbc_oracle(x: &[Vec<f64>], y: &[f64]) -> [f64; 5] {
    let n = x.len();
    let mut nn = Vec::new();
    let mut nb = Vec::new();
    let mut indeg = vec![0.0; n];
    for i in 0..n {
        let mut best_nn = f64::INFINITY;
        for j in 0..n {
            if j != i {
                best_nn = best_nn.min(euclid(&x[i], &x[j]));
            }
        }
        let mut target: Option<(f64, usize)> = None;
        for j in 0..n {
            if y[j] < y[i] {
                let d = euclid(&x[i], &x[j]);
                if target.is_none_or(|(bd, _)| d < bd) {
                    target = Some((d, j));
                }
            }
        }
        if let Some((d, j)) = target {
            nn.push(best_nn);
            nb.push(d);
            indeg[j] += 1.0;
        }
    }
    let ratios: Vec<f64> = nb.iter().zip(&nn).map(|(b, a)| b / a).collect();
    [mean(&nn) / mean(&nb), sd(&nn) / sd(&nb), cor(&nn, &nb), cor(y, &indeg), sd(&ratios) / mean(&ratios)]
}

fn mean_pairwise(x: &[Vec<f64>], idx: &[usize]) -> f64 {
    if idx.len() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut count = 0.0;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            total += euclid(&x[idx[a]], &x[idx[b]]);
            count += 1.0;
        }
    }
    total / count
}

/// `[diff_02, diff_05, diff_10, diff_25, ratio_02, ratio_10]`.
pub fn dispersion_oracle(x: &[Vec<f64>], y: &[f64]) -> [f64; 6] {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].partial_cmp(&y[b]).unwrap().then(a.cmp(&b)));
    let all: Vec<usize> = (0..n).collect();
    let base = mean_pairwise(x, &all);
    let sub = |pct: usize| {
        let m = (pct * n).div_ceil(100);
        mean_pairwise(x, &order[..m])
    };
    let (s2, s5, s10, s25) = (sub(2), sub(5), sub(10), sub(25));
    [s2 - base, s5 - base, s10 - base, s25 - base, s2 / base, s10 / base]
}

/// Ten points on a line, visited left to right.
pub struct IcFixture {
    pub y: [f64; 10],
    /// `(eps, H, M)` worked out by hand from the slope symbols.
    pub table: Vec<(f64, f64, f64)>,
}

pub fn ic_fixture() -> IcFixture {
    let l = |p: f64| p * p.ln() / 6f64.ln();
    // Slopes 2, -1, 0, 3, -3.5, 0, 2.5, -0.1, 2.1 over 8 consecutive pairs.
    // eps = 0:   + - 0 + - 0 + - +   pairs {+-: 3, -0: 2, 0+: 2, -+: 1}, M = 7/9
    // eps = 0.5: + - 0 + - 0 + 0 +   pairs {+-: 2, -0: 2, 0+: 3, +0: 1}, M = 5/9
    // eps = 2.2: 0 0 0 + - 0 + 0 0   pairs {0+: 2, +-: 1, -0: 1, +0: 1}, M = 3/9
    IcFixture {
        y: [0.0, 2.0, 1.0, 1.0, 4.0, 0.5, 0.5, 3.0, 2.9, 5.0],
        table: vec![
            (0.0, -(l(3.0 / 8.0) + 2.0 * l(2.0 / 8.0) + l(1.0 / 8.0)), 7.0 / 9.0),
            (0.5, -(2.0 * l(2.0 / 8.0) + l(3.0 / 8.0) + l(1.0 / 8.0)), 5.0 / 9.0),
            (2.2, -(l(2.0 / 8.0) + 3.0 * l(1.0 / 8.0)), 3.0 / 9.0),
        ],
    }
}
