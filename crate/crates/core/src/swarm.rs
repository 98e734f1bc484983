//! Particle swarm state and the inertia-weight velocity/position update.
//!
//! Per iteration and particle `i`, dimension `j`:
//!
//! ```text
//! v'_ij = w v_ij + c1 r1_ij (pbest_ij - x_ij) + c2 r2_ij (l_ij - x_ij)
//! x'_ij = x_ij + v'_ij
//! ```
//!
//! where `l_i` is the best personal-best position in particle `i`'s
//! neighbourhood. `r1` and `r2` are drawn for the whole swarm before any
//! particle moves, particle-major with the `r1` block preceding the `r2`
//! block for each particle. Positions are not clamped and velocities start
//! at zero. The budget counts iterations; a run evaluates
//! `n_particles * (budget + 1)` points.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand::SeedableRng;

use crate::bbob::{ProblemInstance, DOMAIN};
use crate::config::{HyperParams, TopologyKind};
use crate::linalg::Matrix;
use crate::seed::{split64, Rng};
use crate::topology::{argmin, local_best, ring_neighbors, von_neumann_k, NeighborhoodGraph};
use crate::{Error, Result};

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, Copy)]
pub struct RunSpec<'a> {
    pub instance: &'a ProblemInstance,
    pub config: HyperParams,
    pub topology: TopologyKind,
    /// Iterations after initialization.
    pub budget: usize,
    pub seed: u64,
}

impl RunSpec<'_> {
    fn check(&self) -> Result<()> {
        if self.budget < 1 {
            return Err(Error::arg("budget must be at least 1"));
        }
        if let Err(v) = self.config.validate() {
            return Err(Error::arg(format!("invalid configuration {}: {:?}", self.config, v)));
        }
        Ok(())
    }
}

/// Source of the `r1`/`r2` coefficients.
pub trait DrawSource {
    /// Fills the swarm-wide draw blocks for one iteration, particle-major.
    fn fill(&mut self, r1: &mut Matrix, r2: &mut Matrix);
}

impl DrawSource for Rng {
    fn fill(&mut self, r1: &mut Matrix, r2: &mut Matrix) {
        for i in 0..r1.rows() {
            for v in r1.row_mut(i) {
                *v = self.random::<f64>();
            }
            for v in r2.row_mut(i) {
                *v = self.random::<f64>();
            }
        }
    }
}

/// Draws pinned to a constant, for checking the update by hand.
#[derive(Debug, Clone, Copy)]
pub struct FixedDraws(pub f64);

impl DrawSource for FixedDraws {
    fn fill(&mut self, r1: &mut Matrix, r2: &mut Matrix) {
        for m in [r1, r2] {
            for i in 0..m.rows() {
                m.row_mut(i).fill(self.0);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SwarmState {
    pub positions: Matrix,
    pub velocities: Matrix,
    pub pbest_positions: Matrix,
    pub pbest_values: Vec<f64>,
    /// Completed iterations.
    pub t: usize,
    pub rng: Rng,
    /// Frozen graph for static topologies.
    pub graph: Option<NeighborhoodGraph>,
    r1: Matrix,
    r2: Matrix,
}

impl SwarmState {
    pub fn n_particles(&self) -> usize {
        self.positions.rows()
    }

    pub fn dim(&self) -> usize {
        self.positions.cols()
    }

    /// Index of the swarm-wide best personal best.
    pub fn best_index(&self) -> usize {
        argmin(&self.pbest_values).expect("non-empty swarm")
    }

    pub fn best_value(&self) -> f64 {
        self.pbest_values[self.best_index()]
    }
}

fn evaluate_checked(instance: &ProblemInstance, x: &[f64], t: usize, particle: usize) -> Result<f64> {
    let v = instance.evaluate(x).map_err(|_| Error::NonFinite { iteration: t, particle, value: f64::NAN })?;
    if !v.is_finite() {
        return Err(Error::NonFinite { iteration: t, particle, value: v });
    }
    Ok(v)
}

/// The neighbourhood graph the next update will use.
fn current_graph(state: &SwarmState, spec: &RunSpec<'_>) -> Result<Option<NeighborhoodGraph>> {
    match spec.topology {
        TopologyKind::Star => Ok(None),
        TopologyKind::Ring => {
            let k = (spec.config.k as usize).min(state.n_particles());
            ring_neighbors(&state.positions, k, spec.config.p).map(Some)
        }
        TopologyKind::VonNeumann => Ok(state.graph.clone()),
    }
}

/// Uniform positions in the box, zero velocities.
pub fn init_swarm(spec: &RunSpec<'_>) -> Result<SwarmState> {
    spec.check()?;
    let n = spec.config.n_particles as usize;
    let dim = spec.instance.dim();
    let mut rng = Rng::seed_from_u64(split64(spec.seed, &[0x1417]));
    let (lo, hi) = DOMAIN;
    let data = (0..n * dim).map(|_| rng.random_range(lo..hi)).collect();
    let positions = Matrix::from_vec(n, dim, data);
    let pbest_values = positions
        .iter_rows()
        .enumerate()
        .map(|(i, x)| evaluate_checked(spec.instance, x, 0, i))
        .collect::<Result<Vec<_>>>()?;
    let graph = match spec.topology {
        TopologyKind::VonNeumann => {
            let k = von_neumann_k(dim, spec.config.r as usize, n);
            let mut g = ring_neighbors(&positions, k, spec.config.p)?;
            g.is_static = true;
            Some(g)
        }
        _ => None,
    };
    Ok(SwarmState {
        pbest_positions: positions.clone(),
        velocities: Matrix::zeros(n, dim),
        positions,
        pbest_values,
        t: 0,
        rng,
        graph,
        r1: Matrix::zeros(n, dim),
        r2: Matrix::zeros(n, dim),
    })
}

/// The velocity update for one coordinate.
#[inline]
pub fn velocity_update(w: f64, c1: f64, c2: f64, v: f64, x: f64, pbest: f64, lbest: f64, r1: f64, r2: f64) -> f64 {
    w * v + c1 * r1 * (pbest - x) + c2 * r2 * (lbest - x)
}

/// One iteration with coefficients from `draws`.
pub fn step_with<D: DrawSource + ?Sized>(state: &mut SwarmState, spec: &RunSpec<'_>, draws: &mut D) -> Result<()> {
    if state.t >= spec.budget {
        return Err(Error::arg("budget exhausted"));
    }
    let n = state.n_particles();
    let attractors: Vec<usize> = match current_graph(state, spec)? {
        None => vec![state.best_index(); n],
        Some(g) => local_best(&g, &state.pbest_values)?,
    };
    draws.fill(&mut state.r1, &mut state.r2);
    let HyperParams { c1, c2, w, .. } = spec.config;
    let t = state.t + 1;
    for i in 0..n {
        let l = attractors[i];
        for j in 0..state.dim() {
            let x = state.positions[(i, j)];
            let v = velocity_update(
                w,
                c1,
                c2,
                state.velocities[(i, j)],
                x,
                state.pbest_positions[(i, j)],
                state.pbest_positions[(l, j)],
                state.r1[(i, j)],
                state.r2[(i, j)],
            );
            state.velocities[(i, j)] = v;
        }
    }
    // Move and evaluate only after all velocities use the same pbest snapshot.
    for i in 0..n {
        for j in 0..state.dim() {
            state.positions[(i, j)] += state.velocities[(i, j)];
        }
        let f = evaluate_checked(spec.instance, state.positions.row(i), t, i)?;
        if f < state.pbest_values[i] {
            state.pbest_values[i] = f;
            let row = state.positions.row(i).to_vec();
            state.pbest_positions.row_mut(i).copy_from_slice(&row);
        }
    }
    state.t = t;
    Ok(())
}

/// One iteration using the state's own generator.
pub fn step(state: &mut SwarmState, spec: &RunSpec<'_>) -> Result<()> {
    let mut rng = state.rng.clone();
    let out = step_with(state, spec, &mut rng);
    state.rng = rng;
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrajectory {
    /// Global best objective after each iteration.
    pub best_so_far: Vec<f64>,
    pub final_position: Vec<f64>,
    /// Filled in by callers that can read a clock.
    pub wall_time: f64,
    /// Best-so-far after every evaluation, when requested.
    pub per_evaluation: Option<Vec<f64>>,
}

impl RunTrajectory {
    pub fn final_value(&self) -> f64 {
        *self.best_so_far.last().expect("budget >= 1")
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub log_evaluations: bool,
}

pub fn run(spec: &RunSpec<'_>) -> Result<RunTrajectory> {
    run_with_options(spec, RunOptions::default())
}

pub fn run_with_options(spec: &RunSpec<'_>, opts: RunOptions) -> Result<RunTrajectory> {
    let mut state = init_swarm(spec)?;
    let mut best = state.best_value();
    let mut per_eval = opts.log_evaluations.then(|| {
        let mut acc = f64::INFINITY;
        state
            .pbest_values
            .iter()
            .map(|v| {
                acc = acc.min(*v);
                acc
            })
            .collect::<Vec<f64>>()
    });
    let mut best_so_far = Vec::with_capacity(spec.budget);
    for _ in 0..spec.budget {
        step(&mut state, spec)?;
        if let Some(log) = per_eval.as_mut() {
            let mut acc = *log.last().expect("initial evaluations logged");
            for v in state.positions.iter_rows() {
                // Positions were just evaluated; recompute to keep the log exact.
                let f = spec.instance.evaluate(v)?;
                acc = acc.min(f);
                log.push(acc);
            }
        }
        best = best.min(state.best_value());
        best_so_far.push(best);
    }
    let final_position = state.pbest_positions.row(state.best_index()).to_vec();
    Ok(RunTrajectory { best_so_far, final_position, wall_time: 0.0, per_evaluation: per_eval })
}
