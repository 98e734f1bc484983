//! Argument parsing and dispatch for the `psox` binary.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use psox_core::bbob::{make_instance, sample_instance, SamplingMethod};
use psox_core::config::{full_grid, HyperParams, TopologyKind};
use psox_core::explain::{SurrogateParams, TreeParams};
use psox_core::learner::{LearnerParams, Scheme};
use psox_core::swarm::{init_swarm, RunSpec};
use psox_core::topology::{ring_neighbors, star_neighbors};

use crate::commands;
use crate::error::{Error, Result};
use crate::formats;
use crate::plan::{parse_list, parse_topologies, Budget, ExperimentPlan};
use crate::runner::{self, RunnerOptions, TrajectoryFormat};

#[derive(Debug, Parser)]
#[command(name = "psox", version, about = "Explainable benchmarking of particle swarm optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the PSO grid and write runs.csv (resumable).
    Run(RunArgs),
    /// Compute landscape features per (fid, iid, dim).
    Ela(ElaArgs),
    /// Per-(topology, fid, dim) performance statistics from runs.csv.
    Stats(TableArgs),
    /// Fit surrogates and write SHAP values, model dumps and swarm plots.
    Explain(ExplainArgs),
    /// Train a configuration selector from features and runs.
    Learn(LearnArgs),
    /// Cross-validate selectors against the oracle and baselines.
    Validate(ValidateArgs),
    /// Probe one benchmark function.
    BenchEval(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Topologies: star, ring, von_neumann or all.
    #[arg(long, default_value = "all")]
    pub topology: String,
    /// Function ids, e.g. 1-24 or 1,8,15.
    #[arg(long, default_value = "1-24")]
    pub fids: String,
    #[arg(long, default_value = "1-5")]
    pub iids: String,
    #[arg(long, default_value = "2,5")]
    pub dims: String,
    #[arg(long, default_value_t = 5)]
    pub reps: u32,
    /// Iterations per run; defaults to 100 below five dimensions and 500 from five up.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, env = "PSOX_OUT", default_value = "psox-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TrajArg {
    Csv,
    Bin,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    /// Configuration list: `topology=...` plus key=value lines, or a configs.csv.
    #[arg(long, conflicts_with = "config")]
    pub configs: Option<PathBuf>,
    /// One configuration as c1=..,c2=..,w=..,n_particles=..,k=..,p=..,r=.. (repeatable).
    #[arg(long)]
    pub config: Vec<String>,
    /// Stop after this many new runs.
    #[arg(long)]
    pub max_runs: Option<usize>,
    /// Write per-iteration best-so-far files.
    #[arg(long, value_enum)]
    pub trajectories: Option<TrajArg>,
    /// Also log best-so-far after every evaluation.
    #[arg(long, requires = "trajectories")]
    pub log_evaluations: bool,
}

#[derive(Debug, Args)]
pub struct ElaArgs {
    #[command(flatten)]
    pub common: Common,
    /// Sample size per instance.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// uniform, lhs or sobol.
    #[arg(long, default_value = "lhs")]
    pub method: String,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub common: Common,
    /// Run table; defaults to <out>/runs.csv.
    #[arg(long)]
    pub runs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub table: TableArgs,
    #[arg(long, default_value_t = 50)]
    pub trees: usize,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
}

#[derive(Debug, Args)]
pub struct SelectorArgs {
    #[command(flatten)]
    pub table: TableArgs,
    /// Feature table; defaults to <out>/ela.csv.
    #[arg(long)]
    pub ela: Option<PathBuf>,
    /// Parameters to predict (comma list or all).
    #[arg(long, default_value = "w")]
    pub targets: String,
    #[arg(long, default_value_t = 7)]
    pub depth: usize,
    #[arg(long, default_value_t = 1)]
    pub min_leaf: usize,
    #[arg(long, default_value_t = 50)]
    pub trees: usize,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[command(flatten)]
    pub selector: SelectorArgs,
    /// DT or RF.
    #[arg(long, default_value = "DT")]
    pub method: String,
    /// Also learn AOCC classes split at these ascending thresholds.
    #[arg(long, value_delimiter = ',')]
    pub aocc_classes: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub selector: SelectorArgs,
    /// LoFo or LoIo.
    #[arg(long, default_value = "LoFo")]
    pub scheme: String,
    #[arg(long, default_value = "DT,RF,SB,AB")]
    pub methods: String,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub fid: u8,
    #[arg(long, default_value_t = 1)]
    pub iid: u32,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Comma-separated point to evaluate.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Write this many sample points as CSV.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value = "lhs")]
    pub method: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the initial neighbourhood graph of a swarm with this configuration.
    #[arg(long)]
    pub graph: Option<String>,
    #[arg(long, default_value = "star")]
    pub topology: String,
    /// Output file for --samples or --graph; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn budget(common: &Common) -> Budget {
    common.budget.map_or(Budget::ByDimension, Budget::Fixed)
}

fn sampling(s: &str) -> Result<SamplingMethod> {
    SamplingMethod::parse(s).ok_or_else(|| Error::arg(format!("--method: unknown sampling method '{s}'")))
}

fn say(msg: impl AsRef<str>) {
    eprintln!("psox: {}", msg.as_ref());
}

fn topology_filter(common: &Common) -> Result<Option<TopologyKind>> {
    if common.topology.eq_ignore_ascii_case("all") {
        return Ok(None);
    }
    match parse_topologies(&common.topology)?.as_slice() {
        [t] => Ok(Some(*t)),
        _ => Err(Error::arg("--topology: pick one topology for this command")),
    }
}

fn runs_path(t: &TableArgs) -> PathBuf {
    t.runs.clone().unwrap_or_else(|| t.common.out.join(runner::RUNS_FILE))
}

fn create_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

pub fn build_plan(args: &RunArgs) -> Result<ExperimentPlan> {
    let c = &args.common;
    let mut topologies = parse_topologies(&c.topology)?;
    let configs = if let Some(path) = &args.configs {
        let (configs, topo) = commands::read_config_list(path)?;
        if let (Some(t), true) = (topo, c.topology.eq_ignore_ascii_case("all")) {
            topologies = vec![t];
        }
        configs
    } else if !args.config.is_empty() {
        args.config.iter().map(|s| HyperParams::from_kv(s).map_err(Error::from)).collect::<Result<Vec<_>>>()?
    } else {
        full_grid(TopologyKind::Star).configs().to_vec()
    };
    let plan = ExperimentPlan {
        topologies,
        configs,
        fids: parse_list(&c.fids, "--fids")?,
        iids: parse_list(&c.iids, "--iids")?,
        dims: parse_list(&c.dims, "--dims")?,
        reps: c.reps,
        budget: budget(c),
        master_seed: c.seed,
    };
    plan.validate()?;
    Ok(plan)
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let plan = build_plan(args)?;
    let opts = RunnerOptions {
        jobs: args.common.jobs,
        max_runs: args.max_runs,
        trajectories: args.trajectories.map(|t| match t {
            TrajArg::Csv => TrajectoryFormat::Csv,
            TrajArg::Bin => TrajectoryFormat::Binary,
        }),
        log_evaluations: args.log_evaluations,
    };
    let s = runner::run_plan(&plan, &args.common.out, &opts)?;
    say(format!(
        "{} runs: {} resumed, {} executed, {} failed, {} pending",
        s.total, s.resumed, s.executed, s.failed, s.pending
    ));
    match s.runs_csv {
        Some(p) => say(format!("wrote {}", p.display())),
        None => say("sweep incomplete; rerun the same command to continue"),
    }
    Ok(())
}

fn cmd_ela(args: &ElaArgs) -> Result<()> {
    let c = &args.common;
    let table = commands::ela_table(
        &parse_list(&c.fids, "--fids")?,
        &parse_list(&c.iids, "--iids")?,
        &parse_list(&c.dims, "--dims")?,
        args.n,
        c.seed,
        sampling(&args.method)?,
        c.jobs,
    )?;
    create_out(&c.out)?;
    let warnings = commands::write_ela_outputs(&c.out, &table)?;
    say(format!("{} feature rows, {warnings} warnings", table.len()));
    Ok(())
}

fn cmd_stats(args: &TableArgs) -> Result<()> {
    let runs = formats::read_runs(&runs_path(args))?;
    create_out(&args.common.out)?;
    let p = commands::write_stats(&runs, &args.common.out)?;
    say(format!("wrote {}", p.display()));
    Ok(())
}

fn cmd_explain(args: &ExplainArgs) -> Result<()> {
    let c = &args.table.common;
    let mut runs = formats::read_runs(&runs_path(&args.table))?;
    if let Some(t) = topology_filter(c)? {
        runs.retain(|r| r.topology == t);
    }
    create_out(&c.out)?;
    let params =
        SurrogateParams { n_trees: args.trees, tree: TreeParams { max_depth: args.depth, min_leaf: 1 }, seed: c.seed };
    let s = commands::explain(&runs, params, &c.out, c.jobs)?;
    for w in &s.warnings {
        say(w);
    }
    say(format!("{} surrogates fitted, {} groups skipped", s.groups.len(), s.skipped.len()));
    Ok(())
}

struct SelectorInputs {
    runs: Vec<psox_core::metrics::RunRecord>,
    ela: Vec<psox_core::ela::ElaVector>,
    targets: Vec<psox_core::config::Param>,
    params: LearnerParams,
}

fn selector_inputs(a: &SelectorArgs) -> Result<SelectorInputs> {
    let c = &a.table.common;
    let runs = commands::select_topology(formats::read_runs(&runs_path(&a.table))?, topology_filter(c)?)?;
    let ela = formats::read_ela(&a.ela.clone().unwrap_or_else(|| c.out.join(commands::ELA_FILE)))?;
    let params = LearnerParams { max_depth: a.depth, min_leaf: a.min_leaf, n_trees: a.trees, seed: c.seed };
    Ok(SelectorInputs { runs, ela, targets: commands::parse_targets(&a.targets)?, params })
}

fn cmd_learn(args: &LearnArgs) -> Result<()> {
    let inp = selector_inputs(&args.selector)?;
    let method = *commands::parse_methods(&args.method)?.first().expect("non-empty");
    let out = &args.selector.table.common.out;
    let r = commands::learn(&inp.runs, &inp.ela, &inp.targets, method, &inp.params, args.aocc_classes.as_deref(), out)?;
    for w in &r.warnings {
        say(w);
    }
    say(format!("{} training rows, {} run groups without features", r.dataset_rows, r.excluded));
    for p in &r.rules {
        say(format!("wrote {}", p.display()));
    }
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let inp = selector_inputs(&args.selector)?;
    let scheme =
        Scheme::parse(&args.scheme).ok_or_else(|| Error::arg(format!("--scheme: unknown scheme '{}'", args.scheme)))?;
    let methods = commands::parse_methods(&args.methods)?;
    let out = &args.selector.table.common.out;
    create_out(out)?;
    let report = commands::validate_to_csv(&inp.runs, &inp.ela, &inp.targets, scheme, &methods, &inp.params, out)?;
    for m in &methods {
        let losses = report.losses(*m);
        let mean = losses.iter().sum::<f64>() / losses.len().max(1) as f64;
        say(format!(
            "{} {}: {} folds, mean AOCC loss {}",
            scheme.as_str(),
            m.as_str(),
            losses.len(),
            formats::fmt_f64(mean)
        ));
    }
    Ok(())
}

fn writer(output: &Option<PathBuf>) -> Result<Box<dyn std::io::Write>> {
    Ok(match output {
        Some(p) => Box::new(fs::File::create(p).map_err(|e| Error::io(p, e))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let inst = make_instance(args.fid, args.iid, args.dim)?;
    let stdout_err = |e| Error::io(Path::new("<stdout>"), e);
    let mut out = std::io::stdout().lock();
    let xs: Vec<String> = inst.x_opt().iter().map(|v| formats::fmt_f64(*v)).collect();
    writeln!(out, "f_opt={}", formats::fmt_f64(inst.f_opt())).map_err(stdout_err)?;
    writeln!(out, "x_opt={}", xs.join(",")).map_err(stdout_err)?;
    if let Some(p) = &args.point {
        let x = p
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::arg(format!("--point: cannot parse '{s}'"))))
            .collect::<Result<Vec<_>>>()?;
        writeln!(out, "f(x)={}", formats::fmt_f64(inst.evaluate(&x)?)).map_err(stdout_err)?;
    }
    drop(out);
    if let Some(n) = args.samples {
        let s = sample_instance(&inst, n, args.seed, sampling(&args.method)?)?;
        let path = args.output.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
        formats::write_sample_set(writer(&args.output)?, &s).map_err(|e| Error::io(&path, e))?;
    } else if let Some(kv) = &args.graph {
        let topology: TopologyKind = args.topology.parse()?;
        let config = HyperParams::from_kv(kv)?;
        let spec = RunSpec { instance: &inst, config, topology, budget: 1, seed: args.seed };
        let state = init_swarm(&spec)?;
        let graph = match topology {
            TopologyKind::Star => star_neighbors(state.n_particles()),
            TopologyKind::Ring => {
                ring_neighbors(&state.positions, (config.k as usize).min(state.n_particles()), config.p)?
            }
            TopologyKind::VonNeumann => state.graph.clone().expect("static graph"),
        };
        let path = args.output.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
        formats::write_graph(writer(&args.output)?, &graph).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Ela(a) => cmd_ela(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Explain(a) => cmd_explain(a),
        Command::Learn(a) => cmd_learn(a),
        Command::Validate(a) => cmd_validate(a),
        Command::BenchEval(a) => cmd_bench(a),
    }
}
