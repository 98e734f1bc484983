//! Greedy CART trees for regression and classification.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample as sample_indices;

use crate::linalg::Matrix;
use crate::seed::Rng;
use crate::{stats, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Regression,
    Classification,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Samples with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize, cover: usize },
    /// `value` is the mean target (regression) or the majority label
    /// (classification); `counts` is the class histogram, empty for regression.
    Leaf { value: f64, counts: Vec<usize>, cover: usize },
}

impl Node {
    pub fn cover(&self) -> usize {
        match self {
            Node::Split { cover, .. } | Node::Leaf { cover, .. } => *cover,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: 6, min_leaf: 1 }
    }
}

/// A fitted tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    pub nodes: Vec<Node>,
    pub max_depth: usize,
    pub task: Task,
    /// Sorted distinct training labels (classification only).
    pub classes: Vec<f64>,
    pub n_features: usize,
}

impl TreeModel {
    /// Index of the leaf `x` falls into.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split { feature, threshold, left, right, .. } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { .. } => return i,
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf { value, .. } => *value,
            Node::Split { .. } => unreachable!(),
        }
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        fn go(t: &TreeModel, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

pub(crate) fn class_list(y: &[f64]) -> Vec<f64> {
    let mut c = y.to_vec();
    c.sort_by(f64::total_cmp);
    c.dedup();
    c
}

pub(crate) fn class_of(classes: &[f64], label: f64) -> usize {
    classes.binary_search_by(|c| c.total_cmp(&label)).expect("label among classes")
}

/// Label with the highest count; ties go to the smallest label.
pub(crate) fn majority(classes: &[f64], counts: &[usize]) -> f64 {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    classes[best]
}

pub(crate) fn check_inputs(x: &Matrix, y: &[f64], params: &TreeParams) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::arg(format!("{} rows but {} targets", x.rows(), y.len())));
    }
    if x.cols() < 1 {
        return Err(Error::arg("need at least one feature"));
    }
    if params.min_leaf < 1 {
        return Err(Error::arg("min_leaf must be at least 1"));
    }
    if x.rows() < 2 * params.min_leaf {
        return Err(Error::arg(format!("need at least {} rows, got {}", 2 * params.min_leaf, x.rows())));
    }
    if y.iter().chain(x.as_slice()).any(|v| v.is_nan()) {
        return Err(Error::arg("NaN in training data"));
    }
    Ok(())
}

pub fn fit_tree(x: &Matrix, y: &[f64], task: Task, params: TreeParams) -> Result<TreeModel> {
    check_inputs(x, y, &params)?;
    let rows: Vec<usize> = (0..x.rows()).collect();
    Ok(Builder::new(x, y, task, params, None).build(rows, None))
}

pub(crate) struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    task: Task,
    params: TreeParams,
    classes: Vec<f64>,
    labels: Vec<usize>,
    max_features: Option<usize>,
    nodes: Vec<Node>,
}

struct Candidate {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

impl<'a> Builder<'a> {
    pub(crate) fn new(
        x: &'a Matrix,
        y: &'a [f64],
        task: Task,
        params: TreeParams,
        max_features: Option<usize>,
    ) -> Self {
        let classes = match task {
            Task::Classification => class_list(y),
            Task::Regression => Vec::new(),
        };
        let labels = match task {
            Task::Classification => y.iter().map(|&v| class_of(&classes, v)).collect(),
            Task::Regression => Vec::new(),
        };
        Builder { x, y, task, params, classes, labels, max_features, nodes: Vec::new() }
    }

    pub(crate) fn build(mut self, rows: Vec<usize>, mut rng: Option<&mut Rng>) -> TreeModel {
        self.grow(rows, 0, &mut rng);
        TreeModel {
            nodes: self.nodes,
            max_depth: self.params.max_depth,
            task: self.task,
            classes: self.classes,
            n_features: self.x.cols(),
        }
    }

    fn leaf(&self, rows: &[usize]) -> Node {
        match self.task {
            Task::Regression => {
                let mut v: Vec<f64> = rows.iter().map(|&i| self.y[i]).collect();
                v.sort_by(f64::total_cmp);
                Node::Leaf { value: stats::mean(&v), counts: Vec::new(), cover: rows.len() }
            }
            Task::Classification => {
                let mut counts = vec![0; self.classes.len()];
                for &i in rows {
                    counts[self.labels[i]] += 1;
                }
                Node::Leaf { value: majority(&self.classes, &counts), counts, cover: rows.len() }
            }
        }
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        let first = self.y[rows[0]];
        rows.iter().all(|&i| self.y[i] == first)
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize, rng: &mut Option<&mut Rng>) -> usize {
        let id = self.nodes.len();
        let stop = depth >= self.params.max_depth || rows.len() < 2 * self.params.min_leaf || self.is_pure(&rows);
        let split = if stop { None } else { self.best_split(&rows, rng) };
        let Some(c) = split else {
            let leaf = self.leaf(&rows);
            self.nodes.push(leaf);
            return id;
        };
        let cover = rows.len();
        self.nodes.push(Node::Split { feature: c.feature, threshold: c.threshold, left: 0, right: 0, cover });
        let (l, r): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&i| self.x[(i, c.feature)] <= c.threshold);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        if let Node::Split { left: a, right: b, .. } = &mut self.nodes[id] {
            *a = left;
            *b = right;
        }
        id
    }

    fn features(&self, rng: &mut Option<&mut Rng>) -> Vec<usize> {
        let m = self.x.cols();
        match (self.max_features, rng.as_deref_mut()) {
            (Some(k), Some(rng)) if k < m => {
                let mut f = sample_indices(rng, m, k).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..m).collect(),
        }
    }

    fn best_split(&self, rows: &[usize], rng: &mut Option<&mut Rng>) -> Option<Candidate> {
        let min_leaf = self.params.min_leaf;
        let n = rows.len();
        let mut best: Option<Candidate> = None;
        let mut sorted = rows.to_vec();
        for f in self.features(rng) {
            sorted.sort_by(|&a, &b| self.x[(a, f)].total_cmp(&self.x[(b, f)]).then(a.cmp(&b)));
            let mut scan = Scan::new(self, &sorted);
            for i in 0..n - 1 {
                scan.move_left(self, sorted[i]);
                let a = self.x[(sorted[i], f)];
                let b = self.x[(sorted[i + 1], f)];
                if a == b || i + 1 < min_leaf || n - i - 1 < min_leaf {
                    continue;
                }
                let impurity = scan.impurity();
                let better = match &best {
                    None => true,
                    Some(cur) => impurity < cur.impurity - 1e-12 * (1.0 + cur.impurity.abs()),
                };
                if better {
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some(Candidate { impurity, feature: f, threshold });
                }
            }
        }
        best
    }
}

/// Running left/right statistics while sweeping a sorted feature.
struct Scan {
    n: usize,
    nl: usize,
    // Regression: sums of y and y^2 around a shift for stability.
    shift: f64,
    sl: f64,
    ssl: f64,
    st: f64,
    sst: f64,
    // Classification counts.
    cl: Vec<usize>,
    ct: Vec<usize>,
}

impl Scan {
    fn new(b: &Builder<'_>, rows: &[usize]) -> Self {
        let shift = b.y[rows[0]];
        let mut s =
            Scan { n: rows.len(), nl: 0, shift, sl: 0.0, ssl: 0.0, st: 0.0, sst: 0.0, cl: Vec::new(), ct: Vec::new() };
        match b.task {
            Task::Regression => {
                for &i in rows {
                    let v = b.y[i] - shift;
                    s.st += v;
                    s.sst += v * v;
                }
            }
            Task::Classification => {
                s.cl = vec![0; b.classes.len()];
                s.ct = vec![0; b.classes.len()];
                for &i in rows {
                    s.ct[b.labels[i]] += 1;
                }
            }
        }
        s
    }

    fn move_left(&mut self, b: &Builder<'_>, i: usize) {
        self.nl += 1;
        match b.task {
            Task::Regression => {
                let v = b.y[i] - self.shift;
                self.sl += v;
                self.ssl += v * v;
            }
            Task::Classification => self.cl[b.labels[i]] += 1,
        }
    }

    /// Size-weighted impurity of the two sides.
    fn impurity(&self) -> f64 {
        let nl = self.nl as f64;
        let nr = (self.n - self.nl) as f64;
        if !self.ct.is_empty() {
            let gini =
                |counts: &mut dyn Iterator<Item = f64>, size: f64| size - counts.map(|c| c * c).sum::<f64>() / size;
            let left = gini(&mut self.cl.iter().map(|&c| c as f64), nl);
            let right = gini(&mut self.ct.iter().zip(&self.cl).map(|(&t, &l)| (t - l) as f64), nr);
            left + right
        } else {
            let sr = self.st - self.sl;
            let ssr = self.sst - self.ssl;
            let sse_l = (self.ssl - self.sl * self.sl / nl).max(0.0);
            let sse_r = (ssr - sr * sr / nr).max(0.0);
            sse_l + sse_r
        }
    }
}
