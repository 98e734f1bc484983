//! Anytime performance (AOCC) and per-function performance statistics.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::Float;

use crate::config::{HyperParams, TopologyKind};
use crate::stats;
use crate::swarm::RunTrajectory;
use crate::{Error, Result};

/// Clamp window and floor of the log-regret transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoccParams {
    pub lb: f64,
    pub ub: f64,
    pub floor: f64,
}

impl Default for AoccParams {
    fn default() -> Self {
        AoccParams { lb: -5.0, ub: 5.0, floor: 1e-8 }
    }
}

impl AoccParams {
    fn check(&self) -> Result<()> {
        if !(self.lb < self.ub) || !(self.floor > 0.0) {
            return Err(Error::arg("AOCC parameters need lb < ub and floor > 0"));
        }
        Ok(())
    }
}

/// `log10(max(best_so_far - f_opt, floor))` per iteration.
pub fn log_regret_series(best_so_far: &[f64], f_opt: f64, params: &AoccParams) -> Result<Vec<f64>> {
    params.check()?;
    best_so_far
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            if !b.is_finite() {
                return Err(Error::arg(format!("best-so-far value {i} is not finite")));
            }
            let regret = b - f_opt;
            if regret < -1e-9 {
                return Err(Error::integrity(format!("negative regret {regret} at iteration {i}")));
            }
            Ok(Float::log10(Float::max(regret, params.floor)))
        })
        .collect()
}

/// Area over the convergence curve of a log-regret series, in `[0, 1]`.
pub fn aocc(y: &[f64], params: &AoccParams) -> Result<f64> {
    params.check()?;
    if y.is_empty() {
        return Err(Error::arg("AOCC of an empty series"));
    }
    let span = params.ub - params.lb;
    let terms = y.iter().map(|&v| {
        let c = Float::min(Float::max(v, params.lb), params.ub);
        1.0 - (c - params.lb) / span
    });
    Ok(stats::sum(terms) / y.len() as f64)
}

/// AOCC of a trajectory against a known optimum.
pub fn trajectory_aocc(traj: &RunTrajectory, f_opt: f64, params: &AoccParams) -> Result<f64> {
    aocc(&log_regret_series(&traj.best_so_far, f_opt, params)?, params)
}

/// One scored run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub topology: TopologyKind,
    pub fid: u8,
    pub iid: u32,
    pub dim: usize,
    pub rep: u32,
    /// Position of the configuration in the plan's configuration list.
    pub config_index: usize,
    pub seed: u64,
    pub config: HyperParams,
    pub aocc: f64,
    pub final_regret: f64,
}

impl RunRecord {
    /// Canonical ordering key: topology, fid, iid, dim, rep, config index.
    pub fn sort_key(&self) -> (u8, u8, u32, usize, u32, usize) {
        let t = TopologyKind::ALL.iter().position(|&k| k == self.topology).unwrap_or(0) as u8;
        (t, self.fid, self.iid, self.dim, self.rep, self.config_index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerfStats {
    pub sbm: f64,
    pub sbs: f64,
    pub abm: f64,
    pub abs: f64,
    pub all_mean: f64,
    pub all_std: f64,
    pub single_best_config: HyperParams,
    pub avg_best_config: HyperParams,
}

/// Mean and population standard deviation, independent of input order.
pub fn order_free_mean_std(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = stats::mean(&v);
    let mut sq: Vec<f64> = v.iter().map(|x| (x - m) * (x - m)).collect();
    sq.sort_by(f64::total_cmp);
    (m, Float::sqrt(stats::sum(sq) / v.len() as f64))
}

/// Per-configuration AOCC samples, keyed bit-exactly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigTable {
    entries: BTreeMap<[u64; 7], (HyperParams, Vec<f64>)>,
}

impl ConfigTable {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a RunRecord>) -> Self {
        let mut t = ConfigTable::default();
        for r in records {
            t.push(r.config, r.aocc);
        }
        t
    }

    pub fn push(&mut self, config: HyperParams, value: f64) {
        self.entries.entry(config.key()).or_insert_with(|| (config, Vec::new())).1.push(value);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn contains(&self, config: &HyperParams) -> bool {
        self.entries.contains_key(&config.key())
    }

    pub fn values(&self, config: &HyperParams) -> Option<&[f64]> {
        self.entries.get(&config.key()).map(|e| e.1.as_slice())
    }

    /// `(config, mean, std)` for every configuration.
    pub fn summaries(&self) -> impl Iterator<Item = (HyperParams, f64, f64)> + '_ {
        self.entries.values().map(|(c, v)| {
            let (m, s) = order_free_mean_std(v);
            (*c, m, s)
        })
    }

    /// Highest mean, ties to the lexicographically first configuration.
    pub fn best(&self) -> Option<(HyperParams, f64, f64)> {
        self.best_among(|_| true)
    }

    pub fn best_among(&self, mut keep: impl FnMut(&HyperParams) -> bool) -> Option<(HyperParams, f64, f64)> {
        self.summaries().filter(|(c, ..)| keep(c)).fold(None, |acc, cand| match acc {
            None => Some(cand),
            Some(cur) => {
                let better = match cand.1.total_cmp(&cur.1) {
                    Ordering::Greater => true,
                    Ordering::Equal => cand.0.lex_cmp(&cur.0) == Ordering::Less,
                    Ordering::Less => false,
                };
                Some(if better { cand } else { cur })
            }
        })
    }
}

/// Statistics for one `(topology, fid, dim)` cell.
///
/// `records` may hold runs of other functions and topologies: runs of every
/// function with the same topology and dimension decide the avg-best
/// configuration, the rest are ignored.
pub fn performance_stats(records: &[RunRecord], topology: TopologyKind, fid: u8, dim: usize) -> Result<PerfStats> {
    let pool: Vec<&RunRecord> = records.iter().filter(|r| r.topology == topology && r.dim == dim).collect();
    let here = ConfigTable::from_records(pool.iter().copied().filter(|r| r.fid == fid));
    if here.is_empty() {
        return Err(Error::arg(format!("no runs for {topology} f{fid} d{dim}")));
    }
    let pooled = ConfigTable::from_records(pool.iter().copied());
    let (sb, sbm, sbs) = here.best().expect("non-empty");
    let (ab, _, _) = pooled.best_among(|c| here.contains(c)).expect("non-empty");
    let (abm, abs) = order_free_mean_std(here.values(&ab).expect("present"));
    let all: Vec<f64> = pool.iter().filter(|r| r.fid == fid).map(|r| r.aocc).collect();
    let (all_mean, all_std) = order_free_mean_std(&all);
    Ok(PerfStats { sbm, sbs, abm, abs, all_mean, all_std, single_best_config: sb, avg_best_config: ab })
}

/// Statistics for every `(topology, fid, dim)` present, in that order.
pub fn performance_table(records: &[RunRecord]) -> Result<Vec<((TopologyKind, u8, usize), PerfStats)>> {
    let mut cells: Vec<(u8, TopologyKind, u8, usize)> =
        records.iter().map(|r| (r.sort_key().0, r.topology, r.fid, r.dim)).collect();
    cells.sort_by_key(|c| (c.0, c.2, c.3));
    cells.dedup();
    cells.into_iter().map(|(_, t, f, d)| Ok(((t, f, d), performance_stats(records, t, f, d)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn p() -> AoccParams {
        AoccParams::default()
    }

    #[test]
    fn log_regret_examples() {
        let y = log_regret_series(&[1.0, 0.0, 3.16e2], 0.0, &p()).unwrap();
        assert_eq!(y[0], 0.0);
        assert_eq!(y[1], -8.0);
        assert!((y[2] - 2.499_687_082_618_404).abs() < 1e-12);
        assert!(log_regret_series(&[-1e-6], 0.0, &p()).is_err());
        assert!(log_regret_series(&[-1e-10], 0.0, &p()).is_ok());
        assert!(log_regret_series(&[f64::NAN], 0.0, &p()).is_err());
    }

    #[test]
    fn aocc_examples() {
        assert_eq!(aocc(&[-5.0, -8.0, -100.0], &p()).unwrap(), 1.0);
        assert_eq!(aocc(&[5.0, 7.0, 1e9], &p()).unwrap(), 0.0);
        assert_eq!(aocc(&[0.0], &p()).unwrap(), 0.5);
        assert!(aocc(&[], &p()).is_err());
        let bad = AoccParams { lb: 1.0, ub: 1.0, floor: 1e-8 };
        assert!(aocc(&[0.0], &bad).is_err());
    }

    fn rec(config: HyperParams, fid: u8, aocc: f64) -> RunRecord {
        RunRecord {
            topology: TopologyKind::Star,
            fid,
            iid: 1,
            dim: 2,
            rep: 0,
            config_index: 0,
            seed: 0,
            config,
            aocc,
            final_regret: 0.0,
        }
    }

    const A: HyperParams = HyperParams { c1: 0.3, c2: 0.2, w: 0.9, n_particles: 50, k: 1, p: 1, r: 1 };
    const B: HyperParams = HyperParams { c1: 0.5, c2: 0.2, w: 0.9, n_particles: 50, k: 1, p: 1, r: 1 };

    #[test]
    fn single_config() {
        let rs = [rec(A, 1, 0.2), rec(A, 1, 0.3)];
        let s = performance_stats(&rs, TopologyKind::Star, 1, 2).unwrap();
        for v in [s.sbm, s.abm, s.all_mean] {
            assert!((v - 0.25).abs() < 1e-15);
        }
        for v in [s.sbs, s.abs, s.all_std] {
            assert!((v - 0.05).abs() < 1e-15);
        }
        assert!(performance_stats(&rs, TopologyKind::Ring, 1, 2).is_err());
    }

    #[test]
    fn two_configs_one_function() {
        let rs = [rec(A, 1, 0.9), rec(A, 1, 0.9), rec(B, 1, 0.1), rec(B, 1, 0.1)];
        let s = performance_stats(&rs, TopologyKind::Star, 1, 2).unwrap();
        assert_eq!(s.single_best_config, A);
        assert_eq!(s.sbm, 0.9);
        assert!((s.all_mean - 0.5).abs() < 1e-15);
    }

    #[test]
    fn avg_best_differs_from_single_best() {
        // A wins f1 narrowly, B wins on average thanks to f2.
        let rs = [rec(A, 1, 0.6), rec(B, 1, 0.5), rec(A, 2, 0.1), rec(B, 2, 0.9)];
        let s = performance_stats(&rs, TopologyKind::Star, 1, 2).unwrap();
        assert_eq!(s.single_best_config, A);
        assert_eq!(s.avg_best_config, B);
        assert_eq!(s.sbm, 0.6);
        assert_eq!(s.abm, 0.5);
        assert!(s.abm <= s.sbm);
    }

    #[test]
    fn ties_go_to_lexicographically_first() {
        let rs = [rec(B, 1, 0.5), rec(A, 1, 0.5)];
        let s = performance_stats(&rs, TopologyKind::Star, 1, 2).unwrap();
        assert_eq!(s.single_best_config, A);
        assert_eq!(s.avg_best_config, A);
    }

    #[allow(clippy::manual_clamp)]
    fn direct_aocc(y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &v in y {
            let c = if v < -5.0 {
                -5.0
            } else if v > 5.0 {
                5.0
            } else {
                v
            };
            acc += 1.0 - (c + 5.0) / 10.0;
        }
        acc / y.len() as f64
    }

    proptest! {
        #[test]
        fn matches_direct_transcription(y in proptest::collection::vec(-12.0..12.0f64, 1..200)) {
            let a = aocc(&y, &p()).unwrap();
            prop_assert!((a - direct_aocc(&y)).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn lowering_a_value_never_hurts(y in proptest::collection::vec(-12.0..12.0f64, 1..100), i in any::<prop::sample::Index>(), d in 0.0..5.0f64) {
            let mut z = y.clone();
            let i = i.index(y.len());
            z[i] -= d;
            prop_assert!(aocc(&z, &p()).unwrap() >= aocc(&y, &p()).unwrap() - 1e-15);
        }

        #[test]
        fn stats_shuffle_invariant(vals in proptest::collection::vec((0usize..3, 1u8..3, 0.0..1.0f64), 1..30), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let configs = [A, B, HyperParams { w: 0.5, ..A }];
            let mut rs: Vec<RunRecord> = vals.iter().map(|&(c, f, a)| rec(configs[c], f, a)).collect();
            rs.push(rec(A, 1, 0.5));
            let s1 = performance_stats(&rs, TopologyKind::Star, 1, 2).unwrap();
            rs.shuffle(&mut crate::seed::Rng::seed_from_u64(seed));
            let s2 = performance_stats(&rs, TopologyKind::Star, 1, 2).unwrap();
            prop_assert_eq!(&s1, &s2);
            prop_assert!(s1.sbm >= s1.abm - 1e-12);
        }
    }

    #[test]
    fn table_covers_cells() {
        let rs = vec![rec(A, 2, 0.4), rec(A, 1, 0.3)];
        let t = performance_table(&rs).unwrap();
        assert_eq!(t.iter().map(|c| c.0 .1).collect::<Vec<_>>(), vec![1, 2]);
    }
}
