//! File-level pipeline stages behind the CLI verbs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use psox_core::bbob::{make_instance, sample_instance, SamplingMethod};
use psox_core::config::{HyperParams, Param, TopologyKind};
use psox_core::ela::{compute_ela, ElaVector, FEATURE_NAMES};
use psox_core::explain::{aggregate_shap, fit_tree, SurrogateParams, Task, TreeParams, SURROGATE_FEATURES};
use psox_core::learner::{
    aocc_class, build_dataset, export_tree_rules, fit_selector, validate, LabeledDataset, LearnerParams, Method,
    Scheme, ValidationReport,
};
use psox_core::linalg::Matrix;
use psox_core::metrics::{performance_table, RunRecord};
use psox_core::seed::split64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formats::{self, fmt_f64};
use crate::model::{dump_forest, to_json, ForestDump};
use crate::svg::{swarm_plot, Band};

pub const ELA_FILE: &str = "ela.csv";
pub const ELA_WARNINGS_FILE: &str = "ela_warnings.csv";
pub const STATS_FILE: &str = "stats.csv";
pub const SHAP_FILE: &str = "shap.csv";
pub const SURROGATES_FILE: &str = "surrogates.csv";
pub const REPORT_FILE: &str = "report.csv";

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| Error::arg(format!("thread pool: {e}")))
}

/// Sample seed of one instance's design.
pub fn ela_sample_seed(master: u64, fid: u8, iid: u32, dim: usize) -> u64 {
    split64(master, &[u64::from(fid), u64::from(iid), dim as u64])
}

/// One feature vector per `(fid, iid, dim)`, sorted by that key.
pub fn ela_table(
    fids: &[u8],
    iids: &[u32],
    dims: &[usize],
    n: usize,
    seed: u64,
    method: SamplingMethod,
    jobs: usize,
) -> Result<Vec<ElaVector>> {
    let mut keys = Vec::new();
    for &f in fids {
        for &i in iids {
            for &d in dims {
                keys.push((f, i, d));
            }
        }
    }
    keys.sort_unstable();
    pool(jobs)?.install(|| {
        keys.par_iter()
            .map(|&(fid, iid, dim)| {
                let inst = make_instance(fid, iid, dim)?;
                let s = ela_sample_seed(seed, fid, iid, dim);
                let sample = sample_instance(&inst, n, s, method)?;
                Ok(compute_ela(&sample, s))
            })
            .collect()
    })
}

/// Writes `ela.csv` and `ela_warnings.csv`; returns the warning count.
pub fn write_ela_outputs(out: &Path, table: &[ElaVector]) -> Result<usize> {
    formats::write_ela(&out.join(ELA_FILE), table)?;
    let mut rows = Vec::new();
    for v in table {
        let p = v.provenance.expect("sampled from an instance");
        for w in &v.warnings {
            rows.push(vec![
                p.fid.to_string(),
                p.iid.to_string(),
                p.dim.to_string(),
                p.sample_seed.to_string(),
                w.clone(),
            ]);
        }
    }
    let n = rows.len();
    formats::write_csv(&out.join(ELA_WARNINGS_FILE), &formats::ELA_WARNINGS_HEADER, rows)?;
    Ok(n)
}

pub fn write_stats(runs: &[RunRecord], out: &Path) -> Result<PathBuf> {
    let table = performance_table(runs)?;
    let path = out.join(STATS_FILE);
    formats::write_stats(&path, &table)?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplainSummary {
    pub groups: Vec<((TopologyKind, u8, usize), usize, f64)>,
    pub skipped: Vec<((TopologyKind, u8, usize), usize)>,
    pub warnings: Vec<String>,
}

/// Fits one surrogate per `(topology, fid, dim)` and writes SHAP rows,
/// surrogate fit quality, model dumps and one swarm plot per `(topology, fid)`.
pub fn explain(runs: &[RunRecord], params: SurrogateParams, out: &Path, jobs: usize) -> Result<ExplainSummary> {
    let mut groups: BTreeMap<(u8, u8, usize), Vec<usize>> = BTreeMap::new();
    for (i, r) in runs.iter().enumerate() {
        groups.entry((r.sort_key().0, r.fid, r.dim)).or_default().push(i);
    }
    let mut summary = ExplainSummary { groups: Vec::new(), skipped: Vec::new(), warnings: Vec::new() };
    let mut work = Vec::new();
    for ((t, fid, dim), ids) in groups {
        let topology = TopologyKind::ALL[t as usize];
        if ids.len() < 30 {
            summary.skipped.push(((topology, fid, dim), ids.len()));
            summary.warnings.push(format!("{topology} f{fid} d{dim}: only {} runs, need 30; skipped", ids.len()));
        } else {
            work.push(((topology, fid, dim), ids));
        }
    }
    let fitted = pool(jobs)?.install(|| {
        work.par_iter()
            .map(|((topology, fid, dim), ids)| {
                let records: Vec<RunRecord> = ids.iter().map(|&i| runs[i].clone()).collect();
                let t = TopologyKind::ALL.iter().position(|k| k == topology).expect("known") as u64;
                let p = SurrogateParams { seed: split64(params.seed, &[t, u64::from(*fid), *dim as u64]), ..params };
                aggregate_shap(&records, p).map_err(Error::from)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let models = out.join("models");
    let plots = out.join("plots");
    fs::create_dir_all(&models).map_err(|e| Error::io(&models, e))?;
    fs::create_dir_all(&plots).map_err(|e| Error::io(&plots, e))?;
    let mut shap_rows = Vec::new();
    let mut fit_rows = Vec::new();
    let mut bands: BTreeMap<(u8, u8), Vec<Band>> = BTreeMap::new();
    for (((topology, fid, dim), ids), table) in work.iter().zip(&fitted) {
        shap_rows.extend(formats::shap_rows(*topology, *fid, *dim, table, ids));
        fit_rows.push(vec![
            topology.as_str().into(),
            fid.to_string(),
            dim.to_string(),
            ids.len().to_string(),
            fmt_f64(table.r2_train),
        ]);
        summary.groups.push(((*topology, *fid, *dim), ids.len(), table.r2_train));
        summary.warnings.extend(table.warnings.iter().map(|w| format!("{topology} f{fid} d{dim}: {w}")));
        let dump = dump_forest(&table.model, &SURROGATE_FEATURES, Some("aocc"));
        let path = models.join(format!("surrogate_{topology}_f{fid}_d{dim}.json"));
        fs::write(&path, to_json(&dump)?).map_err(|e| Error::io(&path, e))?;
        let t = TopologyKind::ALL.iter().position(|k| k == topology).expect("known") as u8;
        let entry = bands.entry((t, *fid)).or_insert_with(|| {
            SURROGATE_FEATURES.iter().map(|f| Band { feature: (*f).into(), points: Vec::new() }).collect()
        });
        for row in &table.rows {
            for (j, band) in entry.iter_mut().enumerate() {
                band.points.push((row.shap_values[j], row.feature_values[j]));
            }
        }
    }
    formats::write_csv(&out.join(SHAP_FILE), &formats::SHAP_HEADER, shap_rows)?;
    formats::write_csv(&out.join(SURROGATES_FILE), &formats::SURROGATE_HEADER, fit_rows)?;
    for ((t, fid), b) in bands {
        let topology = TopologyKind::ALL[t as usize];
        let svg = swarm_plot(&format!("SHAP values, {topology}, f{fid}"), &b, params.seed);
        let path = plots.join(format!("shap_{topology}_f{fid}.svg"));
        fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
    }
    Ok(summary)
}

/// Keeps the runs of `topology`, or of the only topology present.
pub fn select_topology(runs: Vec<RunRecord>, topology: Option<TopologyKind>) -> Result<Vec<RunRecord>> {
    let t = match topology {
        Some(t) => t,
        None => {
            let first = runs.first().ok_or_else(|| Error::arg("run table is empty"))?.topology;
            if runs.iter().any(|r| r.topology != first) {
                return Err(Error::arg("run table holds several topologies; pick one with --topology"));
            }
            first
        }
    };
    let kept: Vec<RunRecord> = runs.into_iter().filter(|r| r.topology == t).collect();
    if kept.is_empty() {
        return Err(Error::arg(format!("no runs for topology {t}")));
    }
    Ok(kept)
}

pub fn parse_targets(s: &str) -> Result<Vec<Param>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let ps = if part == "all" {
            Param::ALL.to_vec()
        } else {
            vec![Param::parse(part).ok_or_else(|| Error::arg(format!("--targets: unknown parameter '{part}'")))?]
        };
        for p in ps {
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::arg("--targets: empty list"));
    }
    Ok(out)
}

pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m = Method::parse(part).ok_or_else(|| Error::arg(format!("--methods: unknown method '{part}'")))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::arg("--methods: empty list"));
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct SelectorDump {
    format: &'static str,
    version: u32,
    method: &'static str,
    topology: String,
    targets: Vec<String>,
    avg_best: String,
    models: Vec<ForestDump>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnOutput {
    pub dataset_rows: usize,
    pub excluded: usize,
    pub rules: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Trains a selector on every row and writes its rules and JSON dump.
pub fn learn(
    runs: &[RunRecord],
    ela: &[ElaVector],
    targets: &[Param],
    method: Method,
    params: &LearnerParams,
    aocc_thresholds: Option<&[f64]>,
    out: &Path,
) -> Result<LearnOutput> {
    if !matches!(method, Method::DecisionTree | Method::RandomForest) {
        return Err(Error::arg("learn trains DT or RF selectors"));
    }
    let ds = build_dataset(runs, ela, targets)?;
    if ds.is_empty() {
        return Err(Error::arg("no run group has a matching feature vector"));
    }
    let selector = fit_selector(&ds, runs, method, params)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut rules = Vec::new();
    for (i, p) in targets.iter().enumerate() {
        let tree = selector.tree(i).expect("one model per target");
        let path = out.join(format!("rules_{}.txt", p.name()));
        fs::write(&path, export_tree_rules(tree, &FEATURE_NAMES, p.name())).map_err(|e| Error::io(&path, e))?;
        rules.push(path);
    }
    if let Some(th) = aocc_thresholds {
        rules.push(learn_aocc_classes(&ds, th, params, out)?);
    }
    let dump = SelectorDump {
        format: "psox-selector",
        version: 1,
        method: method.as_str(),
        topology: ds.topology.as_str().into(),
        targets: targets.iter().map(|p| p.name().into()).collect(),
        avg_best: selector.avg_best.to_kv(),
        models: selector
            .models
            .iter()
            .zip(targets)
            .map(|(m, p)| dump_forest(m, &FEATURE_NAMES, Some(p.name())))
            .collect(),
    };
    let path = out.join("selector.json");
    fs::write(&path, to_json(&dump)?).map_err(|e| Error::io(&path, e))?;
    let excluded: Vec<Vec<String>> =
        ds.excluded.iter().map(|k| vec![k.0.to_string(), k.1.to_string(), k.2.to_string()]).collect();
    formats::write_csv(&out.join("excluded.csv"), &["fid", "iid", "dim"], excluded)?;
    Ok(LearnOutput { dataset_rows: ds.len(), excluded: ds.excluded.len(), rules, warnings: ds.warnings })
}

/// A depth-limited tree from features to the class of each row's best AOCC.
fn learn_aocc_classes(ds: &LabeledDataset, thresholds: &[f64], params: &LearnerParams, out: &Path) -> Result<PathBuf> {
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::arg("--aocc-classes thresholds must increase"));
    }
    let y: Vec<f64> = ds.best_aocc.iter().map(|v| aocc_class(*v, thresholds) as f64).collect();
    let x = Matrix::from_vec(ds.len(), ds.features.cols(), ds.features.as_slice().to_vec());
    let tree =
        fit_tree(&x, &y, Task::Classification, TreeParams { max_depth: params.max_depth, min_leaf: params.min_leaf })?;
    let path = out.join("rules_aocc_class.txt");
    fs::write(&path, export_tree_rules(&tree, &FEATURE_NAMES, "aocc_class")).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn validate_to_csv(
    runs: &[RunRecord],
    ela: &[ElaVector],
    targets: &[Param],
    scheme: Scheme,
    methods: &[Method],
    params: &LearnerParams,
    out: &Path,
) -> Result<ValidationReport> {
    let ds = build_dataset(runs, ela, targets)?;
    if ds.is_empty() {
        return Err(Error::arg("no run group has a matching feature vector"));
    }
    let report = validate(&ds, runs, scheme, methods, params)?;
    formats::write_csv(&out.join(REPORT_FILE), &formats::REPORT_HEADER, formats::report_rows(&report))?;
    Ok(report)
}

/// Reads a configuration list: `key=value` records (first line
/// `topology=...`) or a configuration block CSV.
pub fn read_config_list(path: &Path) -> Result<(Vec<HyperParams>, Option<TopologyKind>)> {
    let text = formats::read_text(path)?;
    if text.trim_start().starts_with("topology=") {
        let space = psox_core::config::ConfigSpace::from_text(&text)?;
        return Ok((space.configs().to_vec(), Some(space.topology)));
    }
    let block = formats::parse_config_block(&text, &path.display().to_string())?;
    let first = block.first().map(|b| b.1);
    let mut configs: Vec<HyperParams> = Vec::new();
    for (c, t) in block {
        if Some(t) != first {
            return Err(Error::arg(format!("{}: configuration block mixes topologies", path.display())));
        }
        configs.push(c);
    }
    Ok((configs, first))
}
