//! The experiment grid: which runs exist and how each one is seeded.

use psox_core::config::{HyperParams, TopologyKind};
use psox_core::seed::split64;

use crate::error::{Error, Result};

/// Iterations per run as a function of dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Fixed(usize),
    /// 100 below five dimensions, 500 from five up.
    ByDimension,
}

impl Budget {
    pub fn for_dim(self, dim: usize) -> usize {
        match self {
            Budget::Fixed(b) => b,
            Budget::ByDimension if dim >= 5 => 500,
            Budget::ByDimension => 100,
        }
    }
}

/// Identity of one run inside a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RunKey {
    pub topology: TopologyKind,
    pub fid: u8,
    pub iid: u32,
    pub dim: usize,
    pub rep: u32,
    pub config_index: usize,
}

impl RunKey {
    pub fn topology_index(&self) -> u64 {
        TopologyKind::ALL.iter().position(|&t| t == self.topology).expect("known topology") as u64
    }

    /// `split64(master, [topology, config index, fid, iid, dim, rep])`.
    pub fn seed(&self, master: u64) -> u64 {
        split64(
            master,
            &[
                self.topology_index(),
                self.config_index as u64,
                u64::from(self.fid),
                u64::from(self.iid),
                self.dim as u64,
                u64::from(self.rep),
            ],
        )
    }

    /// Canonical output order: topology, fid, iid, dim, rep, config index.
    pub fn sort_key(&self) -> (u64, u8, u32, usize, u32, usize) {
        (self.topology_index(), self.fid, self.iid, self.dim, self.rep, self.config_index)
    }

    pub fn label(&self) -> String {
        format!("{}_f{}_i{}_d{}_r{}_c{}", self.topology, self.fid, self.iid, self.dim, self.rep, self.config_index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub topologies: Vec<TopologyKind>,
    /// Shared by every topology; the index is the configuration index.
    pub configs: Vec<HyperParams>,
    pub fids: Vec<u8>,
    pub iids: Vec<u32>,
    pub dims: Vec<usize>,
    pub reps: u32,
    pub budget: Budget,
    pub master_seed: u64,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(Error::arg(format!("plan has no {what}")));
        if self.topologies.is_empty() {
            return empty("topologies");
        }
        if self.configs.is_empty() {
            return empty("configurations");
        }
        if self.fids.is_empty() {
            return empty("functions");
        }
        if self.iids.is_empty() {
            return empty("instances");
        }
        if self.dims.is_empty() {
            return empty("dimensions");
        }
        if self.reps == 0 {
            return empty("repetitions");
        }
        if let Some(f) = self.fids.iter().find(|f| !(1..=24).contains(*f)) {
            return Err(Error::arg(format!("fid {f} outside 1..=24")));
        }
        if self.iids.contains(&0) {
            return Err(Error::arg("iids start at 1"));
        }
        if let Some(d) = self.dims.iter().find(|d| !(1..=40).contains(*d)) {
            return Err(Error::arg(format!("dimension {d} outside 1..=40")));
        }
        for d in &self.dims {
            if self.budget.for_dim(*d) == 0 {
                return Err(Error::arg("budget must be at least 1"));
            }
        }
        for (i, c) in self.configs.iter().enumerate() {
            if let Err(v) = c.validate() {
                let msgs: Vec<String> = v.into_iter().map(|m| m.0).collect();
                return Err(Error::arg(format!("configuration {i} ({c}): {}", msgs.join(", "))));
            }
        }
        Ok(())
    }

    /// |topologies| · |configs| · |fids| · |iids| · |dims| · reps.
    pub fn total_runs(&self) -> usize {
        self.topologies.len()
            * self.configs.len()
            * self.fids.len()
            * self.iids.len()
            * self.dims.len()
            * self.reps as usize
    }

    /// Every run key, in canonical order.
    pub fn keys(&self) -> Vec<RunKey> {
        let mut out = Vec::with_capacity(self.total_runs());
        for &topology in &self.topologies {
            for &fid in &self.fids {
                for &iid in &self.iids {
                    for &dim in &self.dims {
                        for rep in 0..self.reps {
                            for config_index in 0..self.configs.len() {
                                out.push(RunKey { topology, fid, iid, dim, rep, config_index });
                            }
                        }
                    }
                }
            }
        }
        out.sort_by_key(|k| k.sort_key());
        out.dedup();
        out
    }
}

/// Parses `1,3,5-8` into a sorted, duplicate-free list.
pub fn parse_list<T>(s: &str, what: &str) -> Result<Vec<T>>
where
    T: TryFrom<u64> + Ord + Copy,
{
    let bad = |part: &str| Error::arg(format!("{what}: cannot parse '{part}'"));
    let num = |p: &str| -> Result<u64> { p.trim().parse::<u64>().map_err(|_| bad(p)) };
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (num(a)?, num(b)?),
            None => (num(part)?, num(part)?),
        };
        if lo > hi || hi - lo > 100_000 {
            return Err(bad(part));
        }
        for v in lo..=hi {
            out.push(T::try_from(v).map_err(|_| bad(part))?);
        }
    }
    if out.is_empty() {
        return Err(Error::arg(format!("{what}: empty list")));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn parse_topologies(s: &str) -> Result<Vec<TopologyKind>> {
    let mut out: Vec<TopologyKind> = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let t = if part.eq_ignore_ascii_case("all") {
            TopologyKind::ALL.to_vec()
        } else {
            vec![part.parse::<TopologyKind>().map_err(|e| Error::arg(format!("--topology: {e}")))?]
        };
        out.extend(t);
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(Error::arg("--topology: empty list"));
    }
    Ok(out)
}
