//! Bagged CART ensembles.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng as _;

use super::cart::{check_inputs, class_list, class_of, majority, Builder, Task, TreeModel, TreeParams};
use crate::linalg::Matrix;
use crate::seed::{rng_for, split64};
use crate::{stats, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: TreeParams,
    pub seed: u64,
    /// Resample rows with replacement for each tree.
    pub bootstrap: bool,
    /// Features considered per split; `None` uses ⌈√m⌉ for classification
    /// and ⌈m/3⌉ for regression.
    pub max_features: Option<usize>,
}

impl ForestParams {
    pub fn new(n_trees: usize, tree: TreeParams, seed: u64) -> Self {
        ForestParams { n_trees, tree, seed, bootstrap: true, max_features: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub task: Task,
    pub classes: Vec<f64>,
    pub n_features: usize,
    pub seed: u64,
    /// Per-tree seeds, `split64(seed, [tree index])`.
    pub tree_seeds: Vec<u64>,
    pub max_features: usize,
    pub bootstrap: bool,
}

pub fn default_max_features(task: Task, m: usize) -> usize {
    let k = match task {
        Task::Classification => Float::ceil(Float::sqrt(m as f64)) as usize,
        Task::Regression => m.div_ceil(3),
    };
    k.clamp(1, m)
}

pub fn fit_forest(x: &Matrix, y: &[f64], task: Task, params: ForestParams) -> Result<ForestModel> {
    check_inputs(x, y, &params.tree)?;
    if params.n_trees < 1 {
        return Err(Error::arg("a forest needs at least one tree"));
    }
    let n = x.rows();
    let m = x.cols();
    let max_features = params.max_features.unwrap_or_else(|| default_max_features(task, m)).clamp(1, m);
    let tree_seeds: Vec<u64> = (0..params.n_trees).map(|t| split64(params.seed, &[t as u64])).collect();
    let trees = tree_seeds
        .iter()
        .map(|&s| {
            let mut rng = rng_for(s, &[]);
            let rows: Vec<usize> =
                if params.bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { (0..n).collect() };
            let mut tree = Builder::new(x, y, task, params.tree, Some(max_features)).build(rows, Some(&mut rng));
            if task == Task::Classification {
                // Align leaf histograms with the forest-wide class list.
                let all = class_list(y);
                if tree.classes != all {
                    for node in &mut tree.nodes {
                        if let super::cart::Node::Leaf { counts, .. } = node {
                            let mut full = vec![0; all.len()];
                            for (c, &k) in tree.classes.iter().zip(counts.iter()) {
                                full[class_of(&all, *c)] = k;
                            }
                            *counts = full;
                        }
                    }
                    tree.classes = all;
                }
            }
            tree
        })
        .collect();
    Ok(ForestModel {
        trees,
        task,
        classes: if task == Task::Classification { class_list(y) } else { Vec::new() },
        n_features: m,
        seed: params.seed,
        tree_seeds,
        max_features,
        bootstrap: params.bootstrap,
    })
}

impl ForestModel {
    /// Mean of the tree outputs (regression) or majority vote (classification).
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self.task {
            Task::Regression => self.mean_tree_output(x),
            Task::Classification => {
                let mut votes = vec![0; self.classes.len()];
                for t in &self.trees {
                    votes[class_of(&self.classes, t.predict(x))] += 1;
                }
                majority(&self.classes, &votes)
            }
        }
    }

    /// Mean of the raw leaf values, the quantity TreeSHAP explains.
    pub fn mean_tree_output(&self, x: &[f64]) -> f64 {
        stats::sum(self.trees.iter().map(|t| t.predict(x))) / self.trees.len() as f64
    }

    pub fn predict_all(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows().map(|r| self.predict(r)).collect()
    }
}
