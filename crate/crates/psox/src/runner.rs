//! Executes a plan in parallel with an append-only checkpoint.
//!
//! Completed runs are appended to `checkpoint.csv` one flushed line at a
//! time by a single writer. On restart a truncated last line is dropped and
//! the remaining runs are executed; any other unreadable line stops the
//! resume. When every run has been attempted, `runs.csv` is written in
//! canonical order, so an interrupted and resumed sweep yields the same
//! bytes as an uninterrupted one.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use psox_core::bbob::{make_instance, ProblemInstance};
use psox_core::metrics::{trajectory_aocc, AoccParams, RunRecord};
use psox_core::swarm::{run_with_options, RunOptions, RunSpec, RunTrajectory};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formats::{self, csv_line, fmt_f64, run_record_fields, FAILURES_HEADER, RUNS_HEADER};
use crate::plan::{ExperimentPlan, RunKey};

pub const CHECKPOINT_FILE: &str = "checkpoint.csv";
pub const RUNS_FILE: &str = "runs.csv";
pub const FAILURES_FILE: &str = "failures.csv";
pub const CONFIGS_FILE: &str = "configs.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryFormat {
    Csv,
    Binary,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunnerOptions {
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    /// Stop after this many new runs (the rest stays pending).
    pub max_runs: Option<usize>,
    pub trajectories: Option<TrajectoryFormat>,
    /// Also log best-so-far after every evaluation (with `trajectories`).
    pub log_evaluations: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub total: usize,
    pub resumed: usize,
    pub executed: usize,
    pub failed: usize,
    pub pending: usize,
    /// Path of the final table once every run has been attempted.
    pub runs_csv: Option<PathBuf>,
}

/// Runs one key of `plan` on its instance.
pub fn execute_run(
    plan: &ExperimentPlan,
    key: &RunKey,
    instance: &ProblemInstance,
    log_evaluations: bool,
) -> psox_core::Result<(RunRecord, RunTrajectory)> {
    let config = plan.configs[key.config_index];
    let seed = key.seed(plan.master_seed);
    let spec = RunSpec { instance, config, topology: key.topology, budget: plan.budget.for_dim(key.dim), seed };
    let start = Instant::now();
    let mut traj = run_with_options(&spec, RunOptions { log_evaluations })?;
    traj.wall_time = start.elapsed().as_secs_f64();
    let aocc = trajectory_aocc(&traj, instance.f_opt(), &AoccParams::default())?;
    let record = RunRecord {
        topology: key.topology,
        fid: key.fid,
        iid: key.iid,
        dim: key.dim,
        rep: key.rep,
        config_index: key.config_index,
        seed,
        config,
        aocc,
        final_regret: traj.final_value() - instance.f_opt(),
    };
    Ok((record, traj))
}

fn key_of(r: &RunRecord) -> RunKey {
    RunKey { topology: r.topology, fid: r.fid, iid: r.iid, dim: r.dim, rep: r.rep, config_index: r.config_index }
}

fn corrupt(path: &Path, line: usize, why: impl std::fmt::Display) -> Error {
    Error::integrity(format!(
        "{} line {line} is corrupt ({why}); refusing to resume. Move the file away to start the sweep over.",
        path.display()
    ))
}

/// Reads the completed runs of a checkpoint and drops a truncated tail.
/// Returns the records and the byte length of the intact prefix.
pub fn load_checkpoint(path: &Path, plan: &ExperimentPlan) -> Result<(Vec<RunRecord>, u64)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let intact = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let text = std::str::from_utf8(&bytes[..intact]).map_err(|_| corrupt(path, 0, "not UTF-8"))?;
    let mut lines = text.split_terminator('\n');
    let header = RUNS_HEADER.join(",");
    match lines.next() {
        None => return Ok((Vec::new(), 0)),
        Some(h) if h == header => {}
        Some(_) => return Err(corrupt(path, 1, "unexpected header")),
    }
    let plan_keys: HashSet<RunKey> = plan.keys().into_iter().collect();
    let mut seen: HashMap<RunKey, RunRecord> = HashMap::new();
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(line.as_bytes());
        let rec = match rdr.records().next() {
            Some(Ok(r)) if r.len() == RUNS_HEADER.len() => r,
            Some(Ok(r)) => return Err(corrupt(path, n, format!("{} fields", r.len()))),
            Some(Err(e)) => return Err(corrupt(path, n, e)),
            None => return Err(corrupt(path, n, "empty line")),
        };
        let r = formats::parse_run_record(&rec, n).map_err(|e| corrupt(path, n, e))?;
        let key = key_of(&r);
        if !plan_keys.contains(&key)
            || r.seed != key.seed(plan.master_seed)
            || r.config != plan.configs[key.config_index]
        {
            return Err(corrupt(path, n, "run does not belong to this plan and seed"));
        }
        match seen.get(&key) {
            Some(prev) if prev == &r => continue,
            Some(_) => return Err(corrupt(path, n, "conflicting duplicate run")),
            None => {}
        }
        seen.insert(key, r.clone());
        out.push(r);
    }
    Ok((out, intact as u64))
}

fn open_checkpoint(path: &Path, intact: u64) -> Result<File> {
    let mut f = OpenOptions::new()
        .create(true)
        .read(true)
        .write(true)
        .truncate(false)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    f.set_len(intact).map_err(|e| Error::io(path, e))?;
    if intact == 0 {
        f.write_all(&csv_line(&RUNS_HEADER.map(String::from))).map_err(|e| Error::io(path, e))?;
    }
    f.flush().map_err(|e| Error::io(path, e))?;
    drop(f);
    OpenOptions::new().append(true).open(path).map_err(|e| Error::io(path, e))
}

fn write_trajectory(
    dir: &Path,
    key: &RunKey,
    traj: &RunTrajectory,
    fmt: TrajectoryFormat,
    budget: usize,
) -> Result<()> {
    let base = dir.join(key.label());
    match fmt {
        TrajectoryFormat::Csv => formats::write_trajectory_csv(&base.with_extension("csv"), &traj.best_so_far)?,
        TrajectoryFormat::Binary => {
            let p = base.with_extension("psot");
            fs::write(&p, formats::encode_trajectory(&traj.best_so_far, budget as u32))
                .map_err(|e| Error::io(&p, e))?;
        }
    }
    if let Some(evals) = &traj.per_evaluation {
        let p = dir.join(format!("{}.evals.csv", key.label()));
        formats::write_csv(
            &p,
            &["evaluation", "best_so_far"],
            evals.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), fmt_f64(*v)]),
        )?;
    }
    Ok(())
}

fn write_configs(out: &Path, plan: &ExperimentPlan) -> Result<()> {
    let rows =
        plan.topologies.iter().flat_map(|&t| plan.configs.iter().map(move |c| formats::config_block_fields(c, t)));
    formats::write_csv(&out.join(CONFIGS_FILE), &formats::CONFIG_BLOCK_HEADER, rows)
}

/// Executes every pending run of `plan` under `out`.
pub fn run_plan(plan: &ExperimentPlan, out: &Path, opts: &RunnerOptions) -> Result<RunSummary> {
    plan.validate()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_configs(out, plan)?;
    let ckpt = out.join(CHECKPOINT_FILE);
    let (done, intact) = if ckpt.exists() { load_checkpoint(&ckpt, plan)? } else { (Vec::new(), 0) };
    let file = open_checkpoint(&ckpt, intact)?;

    let done_keys: HashSet<RunKey> = done.iter().map(key_of).collect();
    let pending: Vec<RunKey> = plan.keys().into_iter().filter(|k| !done_keys.contains(k)).collect();
    let mut instances: BTreeMap<(u8, u32, usize), ProblemInstance> = BTreeMap::new();
    for k in &pending {
        if let std::collections::btree_map::Entry::Vacant(e) = instances.entry((k.fid, k.iid, k.dim)) {
            e.insert(make_instance(k.fid, k.iid, k.dim)?);
        }
    }
    let traj_dir = out.join("trajectories");
    if opts.trajectories.is_some() {
        fs::create_dir_all(&traj_dir).map_err(|e| Error::io(&traj_dir, e))?;
    }

    let writer = Mutex::new(file);
    let records = Mutex::new(done);
    let failures: Mutex<Vec<(RunKey, String)>> = Mutex::new(Vec::new());
    let io_error: Mutex<Option<Error>> = Mutex::new(None);
    let claimed = AtomicUsize::new(0);
    let limit = opts.max_runs.unwrap_or(usize::MAX);

    let work = |key: &RunKey| {
        if claimed.fetch_add(1, Ordering::SeqCst) >= limit {
            return;
        }
        let inst = &instances[&(key.fid, key.iid, key.dim)];
        match execute_run(plan, key, inst, opts.log_evaluations) {
            Ok((rec, traj)) => {
                let mut res = Ok(());
                if let Some(fmt) = opts.trajectories {
                    res = write_trajectory(&traj_dir, key, &traj, fmt, plan.budget.for_dim(key.dim));
                }
                if res.is_ok() {
                    let line = csv_line(&run_record_fields(&rec));
                    let mut w = writer.lock().expect("writer lock");
                    res = w.write_all(&line).and_then(|_| w.flush()).map_err(|e| Error::io(&ckpt, e));
                }
                match res {
                    Ok(()) => records.lock().expect("records lock").push(rec),
                    Err(e) => {
                        io_error.lock().expect("error lock").get_or_insert(e);
                    }
                }
            }
            Err(e) => failures.lock().expect("failures lock").push((*key, e.to_string())),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::arg(format!("thread pool: {e}")))?;
    pool.install(|| pending.par_iter().for_each(work));
    if let Some(e) = io_error.into_inner().expect("error lock") {
        return Err(e);
    }

    let mut failures = failures.into_inner().expect("failures lock");
    failures.sort_by_key(|(k, _)| k.sort_key());
    formats::write_csv(
        &out.join(FAILURES_FILE),
        &FAILURES_HEADER,
        failures.iter().map(|(k, msg)| {
            vec![
                k.topology.as_str().into(),
                k.fid.to_string(),
                k.iid.to_string(),
                k.dim.to_string(),
                k.rep.to_string(),
                k.config_index.to_string(),
                k.seed(plan.master_seed).to_string(),
                msg.clone(),
            ]
        }),
    )?;

    let mut records = records.into_inner().expect("records lock");
    let executed = records.len() - done_keys.len();
    let attempted = executed + failures.len();
    let pending_left = pending.len() - attempted;
    let mut runs_csv = None;
    if pending_left == 0 {
        records.sort_by_key(|r| key_of(r).sort_key());
        let path = out.join(RUNS_FILE);
        let tmp = out.join(format!("{RUNS_FILE}.tmp"));
        formats::write_runs(&tmp, &records)?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        runs_csv = Some(path);
    }
    Ok(RunSummary {
        total: plan.total_runs(),
        resumed: done_keys.len(),
        executed,
        failed: failures.len(),
        pending: pending_left,
        runs_csv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::Budget;
    use psox_core::config::{full_grid, TopologyKind};

    fn plan() -> ExperimentPlan {
        ExperimentPlan {
            topologies: vec![TopologyKind::Star, TopologyKind::Ring],
            configs: full_grid(TopologyKind::Star).configs()[..4].to_vec(),
            fids: vec![1, 8],
            iids: vec![1],
            dims: vec![2],
            reps: 2,
            budget: Budget::Fixed(10),
            master_seed: 5,
        }
    }

    #[test]
    fn sweep_then_resume_is_a_no_op() {
        let dir = tempfile::tempdir().unwrap();
        let s = run_plan(&plan(), dir.path(), &RunnerOptions::default()).unwrap();
        assert_eq!((s.total, s.executed, s.pending, s.failed), (32, 32, 0, 0));
        let first = fs::read(dir.path().join(RUNS_FILE)).unwrap();
        let s = run_plan(&plan(), dir.path(), &RunnerOptions::default()).unwrap();
        assert_eq!((s.resumed, s.executed), (32, 0));
        assert_eq!(fs::read(dir.path().join(RUNS_FILE)).unwrap(), first);
    }

    #[test]
    fn truncated_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let opts = RunnerOptions { max_runs: Some(5), jobs: 2, ..RunnerOptions::default() };
        let s = run_plan(&plan(), dir.path(), &opts).unwrap();
        assert_eq!((s.executed, s.pending), (5, 27));
        assert!(s.runs_csv.is_none());
        let ckpt = dir.path().join(CHECKPOINT_FILE);
        let mut bytes = fs::read(&ckpt).unwrap();
        bytes.extend_from_slice(b"star,1,1,2,0,3,12");
        fs::write(&ckpt, &bytes).unwrap();
        let (recs, _) = load_checkpoint(&ckpt, &plan()).unwrap();
        assert_eq!(recs.len(), 5);
        let s = run_plan(&plan(), dir.path(), &RunnerOptions::default()).unwrap();
        assert_eq!((s.resumed, s.executed, s.pending), (5, 27, 0));
    }

    #[test]
    fn corrupt_line_refuses_to_resume() {
        let dir = tempfile::tempdir().unwrap();
        run_plan(&plan(), dir.path(), &RunnerOptions { max_runs: Some(3), ..RunnerOptions::default() }).unwrap();
        let ckpt = dir.path().join(CHECKPOINT_FILE);
        let text = fs::read_to_string(&ckpt).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        let broken = lines[1].replace("star", "sphere");
        lines[1] = &broken;
        fs::write(&ckpt, lines.join("\n") + "\n").unwrap();
        let e = run_plan(&plan(), dir.path(), &RunnerOptions::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn other_seed_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        run_plan(&plan(), dir.path(), &RunnerOptions { max_runs: Some(2), ..RunnerOptions::default() }).unwrap();
        let other = ExperimentPlan { master_seed: 6, ..plan() };
        assert_eq!(run_plan(&other, dir.path(), &RunnerOptions::default()).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_plan(&plan(), a.path(), &RunnerOptions { jobs: 1, ..RunnerOptions::default() }).unwrap();
        run_plan(&plan(), b.path(), &RunnerOptions { jobs: 4, ..RunnerOptions::default() }).unwrap();
        assert_eq!(fs::read(a.path().join(RUNS_FILE)).unwrap(), fs::read(b.path().join(RUNS_FILE)).unwrap());
    }

    #[test]
    fn trajectories_on_request() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = plan();
        p.fids = vec![1];
        p.topologies = vec![TopologyKind::Star];
        p.configs.truncate(1);
        p.reps = 1;
        let opts = RunnerOptions {
            trajectories: Some(TrajectoryFormat::Binary),
            log_evaluations: true,
            ..RunnerOptions::default()
        };
        run_plan(&p, dir.path(), &opts).unwrap();
        let key = p.keys()[0];
        let bytes = fs::read(dir.path().join("trajectories").join(format!("{}.psot", key.label()))).unwrap();
        let (values, budget) = formats::decode_trajectory(&bytes).unwrap();
        assert_eq!((values.len(), budget), (10, 10));
        let evals =
            fs::read_to_string(dir.path().join("trajectories").join(format!("{}.evals.csv", key.label()))).unwrap();
        assert_eq!(evals.lines().count(), 1 + 50 * 11);
    }
}
