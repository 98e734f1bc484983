//! Learning configurations from landscape features, and validating the
//! choice against the run table with leave-one-function-out (LoFo) and
//! leave-one-instance-out (LoIo) folds.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::config::{HyperParams, Param, TopologyKind};
use crate::ela::{ElaVector, FEATURE_NAMES};
use crate::explain::{fit_forest, ForestModel, ForestParams, Node, Task, TreeModel, TreeParams};
use crate::linalg::Matrix;
use crate::metrics::{ConfigTable, RunRecord};
use crate::{Error, Result};

/// `(fid, iid, dim)`.
pub type RowKey = (u8, u32, usize);

/// Stand-in for undefined feature values so trees can still split on them.
pub const MISSING_FEATURE: f64 = f64::MIN;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub topology: TopologyKind,
    pub keys: Vec<RowKey>,
    /// One row per key, columns in canonical feature order.
    pub features: Matrix,
    pub targets: Vec<Param>,
    /// Per row, the best configuration's value for each target.
    pub labels: Vec<Vec<f64>>,
    pub best_configs: Vec<HyperParams>,
    pub best_aocc: Vec<f64>,
    /// Run keys without a feature vector.
    pub excluded: Vec<RowKey>,
    pub warnings: Vec<String>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn label_column(&self, target: usize) -> Vec<f64> {
        self.labels.iter().map(|l| l[target]).collect()
    }
}

fn single_topology(runs: &[RunRecord]) -> Result<TopologyKind> {
    let first = runs.first().ok_or_else(|| Error::arg("empty run table"))?.topology;
    if runs.iter().any(|r| r.topology != first) {
        return Err(Error::arg("run table mixes topologies; select one first"));
    }
    Ok(first)
}

fn tables_by_key(runs: &[RunRecord]) -> BTreeMap<RowKey, ConfigTable> {
    let mut m: BTreeMap<RowKey, ConfigTable> = BTreeMap::new();
    for r in runs {
        m.entry((r.fid, r.iid, r.dim)).or_default().push(r.config, r.aocc);
    }
    m
}

/// One row per `(fid, iid, dim)`, labelled with that instance's best configuration.
pub fn build_dataset(runs: &[RunRecord], ela: &[ElaVector], targets: &[Param]) -> Result<LabeledDataset> {
    let topology = single_topology(runs)?;
    if targets.is_empty() {
        return Err(Error::arg("no target parameters"));
    }
    let mut features_by_key: BTreeMap<RowKey, &ElaVector> = BTreeMap::new();
    for v in ela {
        let p = v.provenance.ok_or_else(|| Error::arg("feature vector without provenance"))?;
        features_by_key.insert((p.fid, p.iid, p.dim), v);
    }
    let mut ds = LabeledDataset {
        topology,
        keys: Vec::new(),
        features: Matrix::zeros(0, FEATURE_NAMES.len()),
        targets: targets.to_vec(),
        labels: Vec::new(),
        best_configs: Vec::new(),
        best_aocc: Vec::new(),
        excluded: Vec::new(),
        warnings: Vec::new(),
    };
    let mut data = Vec::new();
    for (key, table) in tables_by_key(runs) {
        let Some(v) = features_by_key.get(&key) else {
            ds.excluded.push(key);
            continue;
        };
        let (best, mean, _) = table.best().expect("non-empty group");
        for (name, value) in v.iter() {
            if value.is_nan() {
                ds.warnings.push(format!("f{} i{} d{}: {name} undefined", key.0, key.1, key.2));
                data.push(MISSING_FEATURE);
            } else {
                data.push(value);
            }
        }
        ds.keys.push(key);
        ds.labels.push(targets.iter().map(|&p| best.get(p)).collect());
        ds.best_configs.push(best);
        ds.best_aocc.push(mean);
    }
    ds.features = Matrix::from_vec(ds.keys.len(), FEATURE_NAMES.len(), data);
    Ok(ds)
}

/// Performance class of an AOCC value given ascending thresholds.
pub fn aocc_class(value: f64, thresholds: &[f64]) -> usize {
    thresholds.iter().filter(|&&t| value >= t).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    LoFo,
    LoIo,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::LoFo => "LoFo",
            Scheme::LoIo => "LoIo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lofo" => Some(Scheme::LoFo),
            "loio" => Some(Scheme::LoIo),
            _ => None,
        }
    }

    fn fold_of(self, key: &RowKey) -> u32 {
        match self {
            Scheme::LoFo => u32::from(key.0),
            Scheme::LoIo => key.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    DecisionTree,
    RandomForest,
    SingleBest,
    AverageBest,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::DecisionTree, Method::RandomForest, Method::SingleBest, Method::AverageBest];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::DecisionTree => "DT",
            Method::RandomForest => "RF",
            Method::SingleBest => "SB",
            Method::AverageBest => "AB",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.as_str().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub n_trees: usize,
    pub seed: u64,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams { max_depth: 7, min_leaf: 1, n_trees: 50, seed: 0 }
    }
}

/// A trained configuration predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct Selector {
    pub method: Method,
    pub targets: Vec<Param>,
    /// One classifier per target; a decision tree is a one-tree forest.
    pub models: Vec<ForestModel>,
    /// Best configuration over the training runs, pooled.
    pub avg_best: HyperParams,
    pooled: ConfigTable,
}

impl Selector {
    /// Predicted configuration for a feature row (DT, RF and AB only).
    pub fn predict(&self, features: &[f64]) -> Result<HyperParams> {
        match self.method {
            Method::AverageBest => Ok(self.avg_best),
            Method::SingleBest => Err(Error::arg("the single-best oracle needs the held-out runs")),
            Method::DecisionTree | Method::RandomForest => {
                let values: Vec<f64> =
                    self.models.iter().zip(&self.targets).map(|(m, p)| p.snap(m.predict(features))).collect();
                let matches = |c: &HyperParams| self.targets.iter().zip(&values).all(|(p, v)| c.get(*p) == *v);
                if self.targets.len() == Param::ALL.len() {
                    let mut c = self.avg_best;
                    for (p, v) in self.targets.iter().zip(&values) {
                        c.set(*p, *v);
                    }
                    return Ok(c);
                }
                self.pooled
                    .best_among(matches)
                    .map(|b| b.0)
                    .ok_or_else(|| Error::integrity(format!("no training configuration matches {values:?}")))
            }
        }
    }

    /// The decision tree for target `i` (DT selectors).
    pub fn tree(&self, i: usize) -> Option<&TreeModel> {
        self.models.get(i).and_then(|m| m.trees.first())
    }
}

fn fit_selector_rows(
    ds: &LabeledDataset,
    runs: &[RunRecord],
    rows: &[usize],
    method: Method,
    params: &LearnerParams,
) -> Result<Selector> {
    let train_keys: BTreeSet<RowKey> = rows.iter().map(|&i| ds.keys[i]).collect();
    let pooled = ConfigTable::from_records(runs.iter().filter(|r| train_keys.contains(&(r.fid, r.iid, r.dim))));
    let avg_best = pooled.best().ok_or_else(|| Error::arg("no training runs"))?.0;
    let mut models = Vec::new();
    if matches!(method, Method::DecisionTree | Method::RandomForest) {
        let m = ds.features.cols();
        let x =
            Matrix::from_vec(rows.len(), m, rows.iter().flat_map(|&i| ds.features.row(i).iter().copied()).collect());
        let min_leaf = params.min_leaf.min(rows.len() / 2).max(1);
        let tree = TreeParams { max_depth: params.max_depth, min_leaf };
        for t in 0..ds.targets.len() {
            let y: Vec<f64> = rows.iter().map(|&i| ds.labels[i][t]).collect();
            let fp = match method {
                Method::DecisionTree => {
                    ForestParams { bootstrap: false, max_features: Some(m), ..ForestParams::new(1, tree, params.seed) }
                }
                _ => ForestParams::new(params.n_trees, tree, crate::seed::split64(params.seed, &[t as u64])),
            };
            models.push(fit_forest(&x, &y, Task::Classification, fp)?);
        }
    }
    Ok(Selector { method, targets: ds.targets.clone(), models, avg_best, pooled })
}

/// Trains on every row of `ds`.
pub fn fit_selector(
    ds: &LabeledDataset,
    runs: &[RunRecord],
    method: Method,
    params: &LearnerParams,
) -> Result<Selector> {
    if ds.is_empty() {
        return Err(Error::arg("empty dataset"));
    }
    let rows: Vec<usize> = (0..ds.len()).collect();
    fit_selector_rows(ds, runs, &rows, method, params)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowResult {
    pub key: RowKey,
    pub predicted: HyperParams,
    pub achieved: f64,
    pub sbm: f64,
}

impl RowResult {
    pub fn loss(&self) -> f64 {
        self.sbm - self.achieved
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: u32,
    pub method: Method,
    pub rows: Vec<RowResult>,
}

impl FoldResult {
    pub fn achieved(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.achieved))
    }

    pub fn sbm(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.sbm))
    }

    /// Mean per-row loss.
    pub fn aocc_loss(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.loss()))
    }

    /// Distinct predicted configurations in row order, `|`-joined.
    pub fn predicted_config(&self) -> String {
        let mut seen: Vec<String> = Vec::new();
        for r in &self.rows {
            let kv = r.predicted.to_kv();
            if !seen.contains(&kv) {
                seen.push(kv);
            }
        }
        seen.join("|")
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    crate::stats::mean(&v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub scheme: Scheme,
    pub folds: Vec<FoldResult>,
}

impl ValidationReport {
    pub fn fold_count(&self, method: Method) -> usize {
        self.folds.iter().filter(|f| f.method == method).count()
    }

    /// Fold losses for one method.
    pub fn losses(&self, method: Method) -> Vec<f64> {
        self.folds.iter().filter(|f| f.method == method).map(|f| f.aocc_loss()).collect()
    }
}

/// Cross-validates `methods` under `scheme`. Folds are ordered by fold key,
/// then by method.
pub fn validate(
    ds: &LabeledDataset,
    runs: &[RunRecord],
    scheme: Scheme,
    methods: &[Method],
    params: &LearnerParams,
) -> Result<ValidationReport> {
    if ds.is_empty() {
        return Err(Error::arg("empty dataset"));
    }
    let tables = tables_by_key(runs);
    let fold_keys: BTreeSet<u32> = ds.keys.iter().map(|k| scheme.fold_of(k)).collect();
    let mut folds = Vec::new();
    for &fold in &fold_keys {
        let (test, train): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&i| scheme.fold_of(&ds.keys[i]) == fold);
        if train.is_empty() {
            return Err(Error::arg(format!("fold {fold} leaves no training rows")));
        }
        for &method in methods {
            let selector = fit_selector_rows(ds, runs, &train, method, params)?;
            let rows = test
                .iter()
                .map(|&i| {
                    let key = ds.keys[i];
                    let table = tables.get(&key).ok_or_else(|| Error::integrity(format!("no runs for {key:?}")))?;
                    let (best, sbm, _) = table.best().expect("non-empty group");
                    let predicted = match method {
                        Method::SingleBest => best,
                        _ => selector.predict(ds.features.row(i))?,
                    };
                    let values = table.values(&predicted).ok_or_else(|| {
                        Error::integrity(format!(
                            "predicted configuration {} has no runs on {key:?}",
                            predicted.to_kv()
                        ))
                    })?;
                    let achieved = crate::metrics::order_free_mean_std(values).0;
                    Ok(RowResult { key, predicted, achieved, sbm })
                })
                .collect::<Result<Vec<_>>>()?;
            folds.push(FoldResult { fold, method, rows });
        }
    }
    Ok(ValidationReport { scheme, folds })
}

fn histogram(classes: &[f64], counts: &[usize]) -> String {
    let mut s = String::from("{");
    for (i, (c, n)) in classes.iter().zip(counts).enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{c}: {n}");
    }
    s.push('}');
    s
}

/// One line per root-to-leaf path, in depth-first order (left first).
pub fn export_tree_rules(tree: &TreeModel, feature_names: &[&str], target: &str) -> String {
    fn go(tree: &TreeModel, names: &[&str], target: &str, node: usize, conds: &mut Vec<String>, out: &mut String) {
        match &tree.nodes[node] {
            Node::Split { feature, threshold, left, right, .. } => {
                let name = names.get(*feature).copied().unwrap_or("?");
                conds.push(format!("{name} ≤ {threshold}"));
                go(tree, names, target, *left, conds, out);
                conds.pop();
                conds.push(format!("{name} > {threshold}"));
                go(tree, names, target, *right, conds, out);
                conds.pop();
            }
            Node::Leaf { value, counts, cover } => {
                let lhs = if conds.is_empty() { String::from("(all)") } else { conds.join(" ∧ ") };
                let _ = write!(out, "{lhs} → {target}={value}");
                if !counts.is_empty() {
                    let _ = write!(out, " {}", histogram(&tree.classes, counts));
                }
                let _ = writeln!(out, " n={cover}");
            }
        }
    }
    let mut out = String::new();
    go(tree, feature_names, target, 0, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbob::{SampleProvenance, SamplingMethod};
    use alloc::vec;

    const BASE: HyperParams = HyperParams { c1: 0.5, c2: 0.4, w: 0.7, n_particles: 50, k: 1, p: 1, r: 1 };

    fn run(fid: u8, iid: u32, w: f64, aocc: f64) -> RunRecord {
        RunRecord {
            topology: TopologyKind::Star,
            fid,
            iid,
            dim: 2,
            rep: 0,
            config_index: 0,
            seed: 0,
            config: HyperParams { w, ..BASE },
            aocc,
            final_regret: 0.0,
        }
    }

    fn ela(fid: u8, iid: u32, f0: f64) -> ElaVector {
        let mut values = [0.0; 23];
        values[0] = f0;
        ElaVector {
            values,
            provenance: Some(SampleProvenance {
                fid,
                iid,
                dim: 2,
                sample_seed: 0,
                method: SamplingMethod::LatinHypercube,
            }),
            warnings: Vec::new(),
        }
    }

    #[test]
    fn labels_from_best_config() {
        let runs =
            [run(1, 1, 0.9, 0.8), run(1, 1, 0.5, 0.3), run(2, 1, 0.5, 0.6), run(2, 1, 0.9, 0.1), run(3, 1, 0.7, 0.2)];
        let ds = build_dataset(&runs, &[ela(1, 1, 0.0), ela(2, 1, 1.0)], &[Param::W]).unwrap();
        assert_eq!(ds.keys, vec![(1, 1, 2), (2, 1, 2)]);
        assert_eq!(ds.labels, vec![vec![0.9], vec![0.5]]);
        assert_eq!(ds.excluded, vec![(3, 1, 2)]);
    }

    #[test]
    fn dataset_is_order_invariant() {
        let mut runs = vec![run(1, 1, 0.9, 0.8), run(1, 1, 0.5, 0.3), run(2, 1, 0.5, 0.6), run(2, 1, 0.9, 0.6)];
        let e = [ela(1, 1, 0.0), ela(2, 1, 1.0)];
        let a = build_dataset(&runs, &e, &[Param::W]).unwrap();
        runs.reverse();
        assert_eq!(a, build_dataset(&runs, &e, &[Param::W]).unwrap());
        assert_eq!(a.labels[1], vec![0.5]);
    }

    #[test]
    fn rules_format() {
        let leaf = TreeModel {
            nodes: vec![Node::Leaf { value: 0.5, counts: vec![3, 1], cover: 4 }],
            max_depth: 7,
            task: Task::Classification,
            classes: vec![0.5, 0.9],
            n_features: 1,
        };
        assert_eq!(export_tree_rules(&leaf, &["a"], "w"), "(all) → w=0.5 {0.5: 3, 0.9: 1} n=4\n");
        let stump = TreeModel {
            nodes: vec![
                Node::Split { feature: 0, threshold: 1.5, left: 1, right: 2, cover: 4 },
                Node::Leaf { value: 0.5, counts: vec![2, 0], cover: 2 },
                Node::Leaf { value: 0.9, counts: vec![0, 2], cover: 2 },
            ],
            ..leaf
        };
        assert_eq!(
            export_tree_rules(&stump, &["a"], "w"),
            "a ≤ 1.5 → w=0.5 {0.5: 2, 0.9: 0} n=2\na > 1.5 → w=0.9 {0.5: 0, 0.9: 2} n=2\n"
        );
    }

    #[test]
    fn single_best_has_zero_loss() {
        let mut runs = Vec::new();
        let mut e = Vec::new();
        for fid in 1..=4u8 {
            for iid in 1..=2u32 {
                let x = f64::from(fid);
                e.push(ela(fid, iid, x));
                runs.push(run(fid, iid, 0.5, 0.1 * x));
                runs.push(run(fid, iid, 0.9, 0.5 - 0.1 * x));
            }
        }
        let ds = build_dataset(&runs, &e, &[Param::W]).unwrap();
        for scheme in [Scheme::LoFo, Scheme::LoIo] {
            let rep = validate(&ds, &runs, scheme, &Method::ALL, &LearnerParams::default()).unwrap();
            let expected = if scheme == Scheme::LoFo { 4 } else { 2 };
            for m in Method::ALL {
                assert_eq!(rep.fold_count(m), expected);
                for l in rep.losses(m) {
                    assert!(l >= -1e-12);
                }
            }
            assert!(rep.losses(Method::SingleBest).iter().all(|l| *l == 0.0));
        }
    }

    #[test]
    fn classes_from_thresholds() {
        assert_eq!(aocc_class(0.1, &[0.33, 0.66]), 0);
        assert_eq!(aocc_class(0.5, &[0.33, 0.66]), 1);
        assert_eq!(aocc_class(0.66, &[0.33, 0.66]), 2);
    }
}
