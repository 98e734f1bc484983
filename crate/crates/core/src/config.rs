//! PSO hyperparameter grid and topology-conditional parameters.
//!
//! The grid enumerates the seven domains in declaration order, outermost
//! first: `c1, c2, w, n_particles, k, p, r`, each in its listed value order.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

pub const C1_VALUES: [f64; 4] = [0.3, 0.5, 0.7, 0.9];
pub const C2_VALUES: [f64; 4] = [0.2, 0.4, 0.6, 0.7];
pub const W_VALUES: [f64; 3] = [0.9, 0.5, 0.7];
pub const N_PARTICLES_VALUES: [u32; 3] = [50, 100, 150];
pub const K_VALUES: [u32; 3] = [1, 2, 3];
pub const P_VALUES: [u32; 2] = [1, 2];
pub const R_VALUES: [u32; 2] = [1, 2];

/// Size of the full grid.
pub const GRID_SIZE: usize = 4 * 4 * 3 * 3 * 3 * 2 * 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopologyKind {
    Star,
    Ring,
    VonNeumann,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 3] = [TopologyKind::Star, TopologyKind::Ring, TopologyKind::VonNeumann];

    pub fn as_str(self) -> &'static str {
        match self {
            TopologyKind::Star => "star",
            TopologyKind::Ring => "ring",
            TopologyKind::VonNeumann => "von_neumann",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "star" => Ok(TopologyKind::Star),
            "ring" => Ok(TopologyKind::Ring),
            "von_neumann" | "vonneumann" => Ok(TopologyKind::VonNeumann),
            other => Err(Error::arg(format!("unknown topology '{other}'"))),
        }
    }
}

/// One PSO configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    /// Cognitive coefficient.
    pub c1: f64,
    /// Social coefficient.
    pub c2: f64,
    /// Inertia weight.
    pub w: f64,
    pub n_particles: u32,
    /// Nearest-neighbour count (Ring).
    pub k: u32,
    /// Minkowski norm order (Ring, Von Neumann).
    pub p: u32,
    /// Von Neumann range.
    pub r: u32,
}

/// Names of the seven parameters in grid order.
pub const PARAM_NAMES: [&str; 7] = ["c1", "c2", "w", "n_particles", "k", "p", "r"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    C1,
    C2,
    W,
    NParticles,
    K,
    P,
    R,
}

impl Param {
    pub const ALL: [Param; 7] = [Param::C1, Param::C2, Param::W, Param::NParticles, Param::K, Param::P, Param::R];

    pub fn name(self) -> &'static str {
        PARAM_NAMES[self as usize]
    }

    pub fn parse(s: &str) -> Option<Param> {
        PARAM_NAMES.iter().position(|n| *n == s).map(|i| Param::ALL[i])
    }

    /// Grid values of this parameter in listed order.
    pub fn grid_values(self) -> Vec<f64> {
        match self {
            Param::C1 => C1_VALUES.to_vec(),
            Param::C2 => C2_VALUES.to_vec(),
            Param::W => W_VALUES.to_vec(),
            Param::NParticles => N_PARTICLES_VALUES.iter().map(|v| f64::from(*v)).collect(),
            Param::K => K_VALUES.iter().map(|v| f64::from(*v)).collect(),
            Param::P => P_VALUES.iter().map(|v| f64::from(*v)).collect(),
            Param::R => R_VALUES.iter().map(|v| f64::from(*v)).collect(),
        }
    }

    /// Snaps `v` to the nearest grid value; ties go to the smaller value.
    pub fn snap(self, v: f64) -> f64 {
        let mut vals = self.grid_values();
        vals.sort_by(f64::total_cmp);
        let mut best = vals[0];
        for &g in &vals[1..] {
            // Distances equal up to rounding count as a tie.
            if num_traits::Float::abs(g - v) < num_traits::Float::abs(best - v) - 1e-12 {
                best = g;
            }
        }
        best
    }
}

/// A constraint violated by a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation(pub String);

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl HyperParams {
    pub fn get(&self, param: Param) -> f64 {
        match param {
            Param::C1 => self.c1,
            Param::C2 => self.c2,
            Param::W => self.w,
            Param::NParticles => f64::from(self.n_particles),
            Param::K => f64::from(self.k),
            Param::P => f64::from(self.p),
            Param::R => f64::from(self.r),
        }
    }

    /// Sets `param`; integer parameters are rounded.
    pub fn set(&mut self, param: Param, v: f64) {
        let as_int = || num_traits::Float::round(v) as u32;
        match param {
            Param::C1 => self.c1 = v,
            Param::C2 => self.c2 = v,
            Param::W => self.w = v,
            Param::NParticles => self.n_particles = as_int(),
            Param::K => self.k = as_int(),
            Param::P => self.p = as_int(),
            Param::R => self.r = as_int(),
        }
    }

    /// The seven values in grid order, as reals.
    pub fn to_array(&self) -> [f64; 7] {
        Param::ALL.map(|p| self.get(p))
    }

    /// Lexicographic order over `(c1, c2, w, n_particles, k, p, r)` by value.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.to_array()
            .iter()
            .zip(other.to_array().iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }

    /// Bit-exact key for maps.
    pub fn key(&self) -> [u64; 7] {
        self.to_array().map(f64::to_bits)
    }

    /// Canonicalizes the fields `topology` ignores to their first grid value.
    pub fn effective(&self, topology: TopologyKind) -> Self {
        let mut c = *self;
        match topology {
            TopologyKind::Star => {
                c.k = K_VALUES[0];
                c.p = P_VALUES[0];
                c.r = R_VALUES[0];
            }
            TopologyKind::Ring => c.r = R_VALUES[0],
            TopologyKind::VonNeumann => c.k = K_VALUES[0],
        }
        c
    }

    /// Every violated bound; empty when the configuration is usable.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                out.push(Violation(msg.to_string()));
            }
        };
        check(self.c1.is_finite() && self.c1 >= 0.0, "c1 out of range");
        check(self.c2.is_finite() && self.c2 >= 0.0, "c2 out of range");
        check(self.w.is_finite() && self.w >= 0.0, "w out of range");
        check(self.n_particles >= 1, "n_particles out of range");
        check(self.k >= 1, "k out of range");
        check(matches!(self.p, 1 | 2), "p out of range");
        check(!(self.c1 + self.c2 >= 4.0), "c1+c2 ≥ 4");
        out
    }

    pub fn validate(&self) -> core::result::Result<(), Vec<Violation>> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    /// Flat `key=value` encoding, `;`-separated.
    pub fn to_kv(&self) -> String {
        format!(
            "c1={};c2={};w={};n_particles={};k={};p={};r={}",
            self.c1, self.c2, self.w, self.n_particles, self.k, self.p, self.r
        )
    }

    pub fn from_kv(s: &str) -> Result<Self> {
        let mut vals: [Option<&str>; 7] = [None; 7];
        for part in s.split([';', ' ']).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| Error::arg(format!("malformed field '{part}'")))?;
            let p = Param::parse(k.trim()).ok_or_else(|| Error::arg(format!("unknown key '{k}'")))?;
            if vals[p as usize].replace(v.trim()).is_some() {
                return Err(Error::arg(format!("duplicate key '{k}'")));
            }
        }
        let mut out = HyperParams { c1: 0.0, c2: 0.0, w: 0.0, n_particles: 0, k: 0, p: 0, r: 0 };
        for p in Param::ALL {
            let raw = vals[p as usize].ok_or_else(|| Error::arg(format!("missing key '{}'", p.name())))?;
            match p {
                Param::C1 | Param::C2 | Param::W => {
                    let v: f64 = raw.parse().map_err(|_| Error::arg(format!("bad number '{raw}'")))?;
                    out.set(p, v);
                }
                _ => {
                    let v: u32 = raw.parse().map_err(|_| Error::arg(format!("bad integer '{raw}'")))?;
                    out.set(p, f64::from(v));
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_kv())
    }
}

/// Free-function form of [`HyperParams::effective`].
pub fn effective_params(config: &HyperParams, topology: TopologyKind) -> HyperParams {
    config.effective(topology)
}

/// An ordered, duplicate-free list of configurations for one topology.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSpace {
    pub topology: TopologyKind,
    configs: Vec<HyperParams>,
}

impl ConfigSpace {
    /// The full Cartesian product of the grid domains.
    pub fn full_grid(topology: TopologyKind) -> Self {
        let mut configs = Vec::with_capacity(GRID_SIZE);
        for &c1 in &C1_VALUES {
            for &c2 in &C2_VALUES {
                for &w in &W_VALUES {
                    for &n_particles in &N_PARTICLES_VALUES {
                        for &k in &K_VALUES {
                            for &p in &P_VALUES {
                                for &r in &R_VALUES {
                                    configs.push(HyperParams { c1, c2, w, n_particles, k, p, r });
                                }
                            }
                        }
                    }
                }
            }
        }
        Self { topology, configs }
    }

    /// Builds a space from an explicit list, rejecting duplicates.
    pub fn from_configs(topology: TopologyKind, configs: Vec<HyperParams>) -> Result<Self> {
        for (i, a) in configs.iter().enumerate() {
            if configs[..i].iter().any(|b| b.key() == a.key()) {
                return Err(Error::arg(format!("duplicate configuration {a}")));
            }
        }
        Ok(Self { topology, configs })
    }

    /// Keeps the first occurrence of each behaviourally distinct configuration.
    pub fn deduplicated(&self) -> Self {
        let mut seen: Vec<[u64; 7]> = Vec::new();
        let mut configs = Vec::new();
        for c in &self.configs {
            let e = c.effective(self.topology);
            if !seen.contains(&e.key()) {
                seen.push(e.key());
                configs.push(e);
            }
        }
        Self { topology: self.topology, configs }
    }

    pub fn configs(&self) -> &[HyperParams] {
        &self.configs
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Text form: a `topology=...` line followed by one `key=value` record per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("topology={}\n", self.topology);
        for c in &self.configs {
            s.push_str(&c.to_kv());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines.next().ok_or_else(|| Error::arg("empty config space"))?;
        let topo =
            head.trim().strip_prefix("topology=").ok_or_else(|| Error::arg("first line must be topology=<kind>"))?;
        let topology: TopologyKind = topo.parse()?;
        let configs = lines.map(HyperParams::from_kv).collect::<Result<Vec<_>>>()?;
        Self::from_configs(topology, configs)
    }
}

/// The full grid for `topology`.
pub fn full_grid(topology: TopologyKind) -> ConfigSpace {
    ConfigSpace::full_grid(topology)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_size_and_order() {
        let g = full_grid(TopologyKind::Star);
        assert_eq!(g.len(), 1728);
        assert_eq!(GRID_SIZE, 1728);
        assert_eq!(g.configs()[0], HyperParams { c1: 0.3, c2: 0.2, w: 0.9, n_particles: 50, k: 1, p: 1, r: 1 });
        assert_eq!(g.configs()[1].r, 2);
        assert_eq!(g.configs()[1727], HyperParams { c1: 0.9, c2: 0.7, w: 0.7, n_particles: 150, k: 3, p: 2, r: 2 });
    }

    #[test]
    fn canonicalization() {
        let c = HyperParams { c1: 0.5, c2: 0.4, w: 0.7, n_particles: 100, k: 3, p: 2, r: 2 };
        let s = c.effective(TopologyKind::Star);
        assert_eq!((s.k, s.p, s.r), (1, 1, 1));
        assert_eq!((s.c1, s.c2, s.w, s.n_particles), (0.5, 0.4, 0.7, 100));
        let r = c.effective(TopologyKind::Ring);
        assert_eq!((r.k, r.p, r.r), (3, 2, 1));
        let v = c.effective(TopologyKind::VonNeumann);
        assert_eq!((v.k, v.p, v.r), (1, 2, 2));
    }

    #[test]
    fn distinct_behaviours_per_topology() {
        assert_eq!(full_grid(TopologyKind::Star).deduplicated().len(), 144);
        assert_eq!(full_grid(TopologyKind::Ring).deduplicated().len(), 864);
        assert_eq!(full_grid(TopologyKind::VonNeumann).deduplicated().len(), 576);
    }

    #[test]
    fn validation() {
        let ok = HyperParams { c1: 0.9, c2: 0.7, w: 0.5, n_particles: 50, k: 1, p: 1, r: 1 };
        assert!(ok.validate().is_ok());
        let neg = HyperParams { c1: -0.1, ..ok };
        assert_eq!(neg.validate().unwrap_err(), [Violation("c1 out of range".into())]);
        let unstable = HyperParams { c1: 2.5, c2: 2.0, ..ok };
        assert_eq!(unstable.validate().unwrap_err(), [Violation("c1+c2 ≥ 4".into())]);
        let many = HyperParams { n_particles: 0, p: 3, ..neg };
        assert_eq!(many.violations().len(), 3);
    }

    #[test]
    fn snapping() {
        assert_eq!(Param::W.snap(0.6), 0.5);
        assert_eq!(Param::W.snap(0.82), 0.9);
        assert_eq!(Param::C2.snap(0.65), 0.6);
        assert_eq!(Param::NParticles.snap(1000.0), 150.0);
    }

    #[test]
    fn kv_errors() {
        assert!(HyperParams::from_kv("c1=0.3").is_err());
        assert!(HyperParams::from_kv("c1=0.3;c1=0.4;c2=0.2;w=0.9;n_particles=50;k=1;p=1;r=1").is_err());
        assert!(HyperParams::from_kv("c1=x;c2=0.2;w=0.9;n_particles=50;k=1;p=1;r=1").is_err());
    }

    fn arb_params() -> impl Strategy<Value = HyperParams> {
        (0.0..3.0f64, 0.0..3.0f64, 0.0..1.5f64, 1u32..300, 1u32..10, 1u32..3, 0u32..5)
            .prop_map(|(c1, c2, w, n_particles, k, p, r)| HyperParams { c1, c2, w, n_particles, k, p, r })
    }

    proptest! {
        #[test]
        fn kv_round_trip(c in arb_params()) {
            prop_assert_eq!(HyperParams::from_kv(&c.to_kv()).unwrap(), c);
        }

        #[test]
        fn space_text_round_trip(cs in proptest::collection::vec(arb_params(), 0..20), t in 0usize..3) {
            let space = ConfigSpace::from_configs(TopologyKind::ALL[t], Vec::new()).unwrap();
            let mut configs = Vec::new();
            for c in cs {
                if !configs.iter().any(|o: &HyperParams| o.key() == c.key()) {
                    configs.push(c);
                }
            }
            let space = ConfigSpace { configs, ..space };
            prop_assert_eq!(ConfigSpace::from_text(&space.to_text()).unwrap(), space);
        }

        #[test]
        fn canonicalization_idempotent(c in arb_params(), t in 0usize..3) {
            let topo = TopologyKind::ALL[t];
            prop_assert_eq!(c.effective(topo).effective(topo), c.effective(topo));
        }
    }
}
