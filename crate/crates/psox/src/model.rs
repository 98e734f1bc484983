//! Versioned JSON dump of trees and forests.

use psox_core::explain::{ForestModel, Node, Task, TreeModel};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "psox-forest";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeDump {
    Split { feature: usize, threshold: f64, children: [usize; 2], cover: usize },
    Leaf { value: f64, counts: Vec<usize>, cover: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDump {
    pub max_depth: usize,
    pub nodes: Vec<NodeDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestDump {
    pub format: String,
    pub version: u32,
    pub task: String,
    pub classes: Vec<f64>,
    pub feature_names: Vec<String>,
    pub target: Option<String>,
    pub seed: u64,
    pub tree_seeds: Vec<u64>,
    pub max_features: usize,
    pub bootstrap: bool,
    pub trees: Vec<TreeDump>,
}

fn task_name(t: Task) -> &'static str {
    match t {
        Task::Regression => "regression",
        Task::Classification => "classification",
    }
}

pub fn dump_forest(model: &ForestModel, feature_names: &[&str], target: Option<&str>) -> ForestDump {
    ForestDump {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        task: task_name(model.task).into(),
        classes: model.classes.clone(),
        feature_names: feature_names.iter().map(|s| s.to_string()).collect(),
        target: target.map(String::from),
        seed: model.seed,
        tree_seeds: model.tree_seeds.clone(),
        max_features: model.max_features,
        bootstrap: model.bootstrap,
        trees: model
            .trees
            .iter()
            .map(|t| TreeDump {
                max_depth: t.max_depth,
                nodes: t
                    .nodes
                    .iter()
                    .map(|n| match n {
                        Node::Split { feature, threshold, left, right, cover } => NodeDump::Split {
                            feature: *feature,
                            threshold: *threshold,
                            children: [*left, *right],
                            cover: *cover,
                        },
                        Node::Leaf { value, counts, cover } => {
                            NodeDump::Leaf { value: *value, counts: counts.clone(), cover: *cover }
                        }
                    })
                    .collect(),
            })
            .collect(),
    }
}

pub fn load_forest(dump: &ForestDump) -> Result<ForestModel> {
    if dump.format != MODEL_FORMAT || dump.version != MODEL_VERSION {
        return Err(Error::arg(format!("unsupported model format {} v{}", dump.format, dump.version)));
    }
    let task = match dump.task.as_str() {
        "regression" => Task::Regression,
        "classification" => Task::Classification,
        other => return Err(Error::arg(format!("unknown task '{other}'"))),
    };
    let n_features = dump.feature_names.len();
    let trees = dump
        .trees
        .iter()
        .map(|t| {
            let nodes: Vec<Node> = t
                .nodes
                .iter()
                .map(|n| match n {
                    NodeDump::Split { feature, threshold, children, cover } => Node::Split {
                        feature: *feature,
                        threshold: *threshold,
                        left: children[0],
                        right: children[1],
                        cover: *cover,
                    },
                    NodeDump::Leaf { value, counts, cover } => {
                        Node::Leaf { value: *value, counts: counts.clone(), cover: *cover }
                    }
                })
                .collect();
            let n = nodes.len();
            for node in &nodes {
                if let Node::Split { feature, left, right, .. } = node {
                    if *feature >= n_features || *left >= n || *right >= n {
                        return Err(Error::integrity("model references a missing node or feature"));
                    }
                }
            }
            Ok(TreeModel { nodes, max_depth: t.max_depth, task, classes: dump.classes.clone(), n_features })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        trees,
        task,
        classes: dump.classes.clone(),
        n_features,
        seed: dump.seed,
        tree_seeds: dump.tree_seeds.clone(),
        max_features: dump.max_features,
        bootstrap: dump.bootstrap,
    })
}

pub fn to_json(dump: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(dump)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use psox_core::explain::{fit_forest, ForestParams, TreeParams};
    use psox_core::linalg::Matrix;

    #[test]
    fn round_trip() {
        let x = Matrix::from_vec(12, 2, (0..24).map(|v| f64::from(v % 7)).collect());
        let y: Vec<f64> = (0..12).map(|i| if x.row(i)[0] > 3.0 { 0.9 } else { 0.5 }).collect();
        let m = fit_forest(&x, &y, Task::Classification, ForestParams::new(3, TreeParams::default(), 4)).unwrap();
        let text = to_json(&dump_forest(&m, &["a", "b"], Some("w"))).unwrap();
        let back: ForestDump = serde_json::from_str(&text).unwrap();
        assert_eq!(load_forest(&back).unwrap(), m);
        assert!(text.contains("\"version\": 1"));
    }

    #[test]
    fn rejects_other_versions() {
        let mut d = dump_forest(
            &fit_forest(
                &Matrix::from_rows(&[[0.0], [1.0]]),
                &[0.0, 1.0],
                Task::Regression,
                ForestParams::new(1, TreeParams::default(), 0),
            )
            .unwrap(),
            &["a"],
            None,
        );
        d.version = 2;
        assert!(load_forest(&d).is_err());
    }
}
