//! Forest surrogate of AOCC over hyperparameters, explained per run.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::cart::{Task, TreeParams};
use super::forest::{fit_forest, ForestModel, ForestParams};
use super::r_squared;
use super::shap::tree_shap;
use crate::linalg::Matrix;
use crate::metrics::RunRecord;
use crate::{Error, Result};

/// Surrogate inputs, in column order.
pub const SURROGATE_FEATURES: [&str; 9] =
    ["c1", "c2", "w", "n_particles", "k", "p", "r", "instance_variance", "stochastic_variance"];

const MIN_RECORDS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateParams {
    pub n_trees: usize,
    pub tree: TreeParams,
    pub seed: u64,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        SurrogateParams { n_trees: 50, tree: TreeParams { max_depth: 6, min_leaf: 1 }, seed: 0 }
    }
}

/// Attribution of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapRow {
    /// Position of the run in the input slice.
    pub record_id: usize,
    pub feature_values: [f64; 9],
    pub shap_values: [f64; 9],
    pub base_value: f64,
    pub prediction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapTable {
    pub rows: Vec<ShapRow>,
    pub r2_train: f64,
    pub model: ForestModel,
    pub warnings: Vec<String>,
}

impl ShapTable {
    /// Mean absolute attribution per feature.
    pub fn mean_abs(&self) -> [f64; 9] {
        let mut m = [0.0; 9];
        for r in &self.rows {
            for (acc, v) in m.iter_mut().zip(&r.shap_values) {
                *acc += v.abs();
            }
        }
        m.map(|v| v / self.rows.len().max(1) as f64)
    }
}

pub fn surrogate_features(r: &RunRecord) -> [f64; 9] {
    let c = r.config;
    [
        c.c1,
        c.c2,
        c.w,
        f64::from(c.n_particles),
        f64::from(c.k),
        f64::from(c.p),
        f64::from(c.r),
        f64::from(r.iid),
        f64::from(r.rep),
    ]
}

/// Fits the surrogate on `records` and explains every run.
pub fn aggregate_shap(records: &[RunRecord], params: SurrogateParams) -> Result<ShapTable> {
    if records.len() < MIN_RECORDS {
        return Err(Error::arg(format!("need at least {MIN_RECORDS} runs, got {}", records.len())));
    }
    let feats: Vec<[f64; 9]> = records.iter().map(surrogate_features).collect();
    let x = Matrix::from_vec(records.len(), 9, feats.iter().flatten().copied().collect());
    let y: Vec<f64> = records.iter().map(|r| r.aocc).collect();
    let mut warnings = Vec::new();
    let fp = ForestParams::new(params.n_trees, params.tree, params.seed);
    let model = fit_forest(&x, &y, Task::Regression, fp)?;
    let pred = model.predict_all(&x);
    let r2_train = r_squared(&pred, &y)?;
    if y.iter().all(|v| *v == y[0]) {
        warnings.push(String::from("constant AOCC; R2 reported as 0"));
    }
    let rows = feats
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let a = tree_shap(&model, f)?;
            let mut shap_values = [0.0; 9];
            shap_values.copy_from_slice(&a.contributions);
            Ok(ShapRow {
                record_id: i,
                feature_values: *f,
                shap_values,
                base_value: a.base_value,
                prediction: a.prediction,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShapTable { rows, r2_train, model, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{full_grid, TopologyKind};

    fn records(aocc: impl Fn(&RunRecord) -> f64) -> Vec<RunRecord> {
        full_grid(TopologyKind::Star)
            .configs()
            .iter()
            .step_by(9)
            .enumerate()
            .map(|(i, c)| {
                let mut r = RunRecord {
                    topology: TopologyKind::Star,
                    fid: 1,
                    iid: 1 + (i % 3) as u32,
                    dim: 2,
                    rep: (i % 2) as u32,
                    config_index: i,
                    seed: i as u64,
                    config: *c,
                    aocc: 0.0,
                    final_regret: 0.0,
                };
                r.aocc = aocc(&r);
                r
            })
            .collect()
    }

    #[test]
    fn constant_target() {
        let rs = records(|_| 0.4);
        let t = aggregate_shap(&rs, SurrogateParams { n_trees: 5, ..Default::default() }).unwrap();
        assert_eq!(t.r2_train, 0.0);
        assert!(!t.warnings.is_empty());
        assert!(t.rows.iter().all(|r| r.shap_values.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn inertia_dominates() {
        let rs = records(|r| 1.0 - r.config.w);
        let t = aggregate_shap(&rs, SurrogateParams { n_trees: 20, ..Default::default() }).unwrap();
        let m = t.mean_abs();
        for (i, v) in m.iter().enumerate() {
            if i != 2 {
                assert!(m[2] > *v, "{:?}", m);
            }
        }
        for row in &t.rows {
            let total: f64 = row.base_value + row.shap_values.iter().sum::<f64>();
            assert!((total - row.prediction).abs() < 1e-9);
        }
        assert!(t.r2_train > 0.95);
    }

    #[test]
    fn too_few_records() {
        let rs = records(|_| 0.1);
        assert!(aggregate_shap(&rs[..29], SurrogateParams::default()).is_err());
    }
}
