//! Exact path-dependent TreeSHAP.
//!
//! Each tree is explained with the polynomial-time path algorithm of
//! Lundberg et al.: feature absence is modelled by following both children
//! weighted by their training cover. Forest attributions are the mean of the
//! per-tree attributions, so they explain [`ForestModel::mean_tree_output`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::cart::{Node, TreeModel};
use super::forest::ForestModel;
use crate::{stats, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ShapAttribution {
    pub base_value: f64,
    pub contributions: Vec<f64>,
    pub prediction: f64,
}

impl ShapAttribution {
    /// `|base + sum(contributions) - prediction|`.
    pub fn local_accuracy_error(&self) -> f64 {
        let total = self.base_value + stats::sum(self.contributions.iter().copied());
        (total - self.prediction).abs()
    }
}

#[derive(Debug, Clone, Copy)]
struct PathElement {
    feature: Option<usize>,
    zero: f64,
    one: f64,
    weight: f64,
}

fn extend(path: &mut Vec<PathElement>, zero: f64, one: f64, feature: Option<usize>) {
    let d = path.len();
    path.push(PathElement { feature, zero, one, weight: if d == 0 { 1.0 } else { 0.0 } });
    let dp1 = (d + 1) as f64;
    for i in (0..d).rev() {
        path[i + 1].weight += one * path[i].weight * (i + 1) as f64 / dp1;
        path[i].weight = zero * path[i].weight * (d - i) as f64 / dp1;
    }
}

fn unwind(path: &mut Vec<PathElement>, k: usize) {
    let d = path.len() - 1;
    let PathElement { one, zero, .. } = path[k];
    let dp1 = (d + 1) as f64;
    let mut next = path[d].weight;
    for i in (0..d).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next * dp1 / ((i + 1) as f64 * one);
            next = tmp - path[i].weight * zero * (d - i) as f64 / dp1;
        } else {
            path[i].weight = path[i].weight * dp1 / (zero * (d - i) as f64);
        }
    }
    for i in k..d {
        path[i].feature = path[i + 1].feature;
        path[i].zero = path[i + 1].zero;
        path[i].one = path[i + 1].one;
    }
    path.pop();
}

fn unwound_sum(path: &[PathElement], k: usize) -> f64 {
    let d = path.len() - 1;
    let PathElement { one, zero, .. } = path[k];
    let dp1 = (d + 1) as f64;
    let mut next = path[d].weight;
    let mut total = 0.0;
    for i in (0..d).rev() {
        if one != 0.0 {
            let tmp = next * dp1 / ((i + 1) as f64 * one);
            total += tmp;
            next = path[i].weight - tmp * zero * (d - i) as f64 / dp1;
        } else {
            total += path[i].weight / zero / ((d - i) as f64 / dp1);
        }
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    tree: &TreeModel,
    node: usize,
    x: &[f64],
    phi: &mut [f64],
    parent: &[PathElement],
    zero: f64,
    one: f64,
    feature: Option<usize>,
) {
    let mut path = parent.to_vec();
    extend(&mut path, zero, one, feature);
    match &tree.nodes[node] {
        Node::Leaf { value, .. } => {
            for i in 1..path.len() {
                let w = unwound_sum(&path, i);
                let el = path[i];
                phi[el.feature.expect("only the root element lacks a feature")] += w * (el.one - el.zero) * value;
            }
        }
        Node::Split { feature: f, threshold, left, right, cover } => {
            let (hot, cold) = if x[*f] <= *threshold { (*left, *right) } else { (*right, *left) };
            let c = *cover as f64;
            let hot_zero = tree.nodes[hot].cover() as f64 / c;
            let cold_zero = tree.nodes[cold].cover() as f64 / c;
            let (mut in_zero, mut in_one) = (1.0, 1.0);
            if let Some(k) = path.iter().position(|e| e.feature == Some(*f)) {
                in_zero = path[k].zero;
                in_one = path[k].one;
                unwind(&mut path, k);
            }
            recurse(tree, hot, x, phi, &path, hot_zero * in_zero, in_one, Some(*f));
            recurse(tree, cold, x, phi, &path, cold_zero * in_zero, 0.0, Some(*f));
        }
    }
}

/// Cover-weighted mean of the leaf values: the output with no features known.
pub fn expected_value(tree: &TreeModel) -> f64 {
    let root = tree.nodes[0].cover() as f64;
    stats::sum(tree.nodes.iter().filter_map(|n| match n {
        Node::Leaf { value, cover, .. } => Some(*value * *cover as f64 / root),
        Node::Split { .. } => None,
    }))
}

pub fn tree_shap_single(tree: &TreeModel, x: &[f64]) -> Result<ShapAttribution> {
    if x.len() != tree.n_features {
        return Err(Error::arg(format!("expected {} features, got {}", tree.n_features, x.len())));
    }
    let mut phi = vec![0.0; x.len()];
    recurse(tree, 0, x, &mut phi, &[], 1.0, 1.0, None);
    Ok(ShapAttribution { base_value: expected_value(tree), contributions: phi, prediction: tree.predict(x) })
}

/// Attributions of the forest's mean tree output at `x`.
pub fn tree_shap(model: &ForestModel, x: &[f64]) -> Result<ShapAttribution> {
    if x.len() != model.n_features {
        return Err(Error::arg(format!("expected {} features, got {}", model.n_features, x.len())));
    }
    let t = model.trees.len() as f64;
    let mut phi = vec![0.0; x.len()];
    let mut base = 0.0;
    for tree in &model.trees {
        let a = tree_shap_single(tree, x)?;
        for (p, c) in phi.iter_mut().zip(&a.contributions) {
            *p += c;
        }
        base += a.base_value;
    }
    phi.iter_mut().for_each(|p| *p /= t);
    Ok(ShapAttribution { base_value: base / t, contributions: phi, prediction: model.mean_tree_output(x) })
}
