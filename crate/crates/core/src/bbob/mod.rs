//! BBOB-style noiseless benchmark suite.
//!
//! Instances are seeded from `(fid, iid, dim)`: the optimum `x_opt` is drawn
//! uniformly from `[-4, 4]^dim`, `f_opt` is fixed to zero and the rotations
//! `R` and `Q` come from orthonormalizing seeded Gaussian matrices. The base
//! functions and their oscillation/asymmetry transforms follow the published
//! noiseless definitions, with every function re-anchored so that its unique
//! global minimum sits exactly at `x_opt`.

mod functions;
mod sampling;
mod sobol;
pub mod transforms;

use alloc::format;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{orthonormalize_rows, Matrix};
use crate::seed::{rng_for, split64};
use crate::{Error, Result};

pub use sampling::{sample_instance, sample_unit_points, SampleProvenance, SampleSet, SamplingMethod};
pub use sobol::{sobol_points, SOBOL_MAX_DIM};

/// Number of functions in the suite.
pub const N_FUNCTIONS: u8 = 24;
/// Largest supported dimension.
pub const MAX_DIM: usize = 40;
/// Lower and upper bound of the search box in every coordinate.
pub const DOMAIN: (f64, f64) = (-5.0, 5.0);

const INSTANCE_SALT: u64 = 0x5EED_B0B5_0000_0001;

/// The five structural classes of the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionGroup {
    Separable,
    LowModerateConditioning,
    HighConditioningUnimodal,
    MultimodalAdequateStructure,
    MultimodalWeakStructure,
}

/// Coarse modality label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modality {
    Unimodal,
    Multimodal,
    HighlyMultimodal,
}

pub fn function_group(fid: u8) -> Option<FunctionGroup> {
    Some(match fid {
        1..=5 => FunctionGroup::Separable,
        6..=9 => FunctionGroup::LowModerateConditioning,
        10..=14 => FunctionGroup::HighConditioningUnimodal,
        15..=19 => FunctionGroup::MultimodalAdequateStructure,
        20..=24 => FunctionGroup::MultimodalWeakStructure,
        _ => return None,
    })
}

pub fn modality(fid: u8) -> Option<Modality> {
    Some(match fid {
        1 | 2 | 5..=14 => Modality::Unimodal,
        3 | 4 | 15 | 16 | 20 | 23 | 24 => Modality::Multimodal,
        17..=19 | 21 | 22 => Modality::HighlyMultimodal,
        _ => return None,
    })
}

pub fn function_name(fid: u8) -> Option<&'static str> {
    const NAMES: [&str; 24] = [
        "sphere",
        "ellipsoid",
        "rastrigin",
        "buche_rastrigin",
        "linear_slope",
        "attractive_sector",
        "step_ellipsoid",
        "rosenbrock",
        "rosenbrock_rotated",
        "ellipsoid_rotated",
        "discus",
        "bent_cigar",
        "sharp_ridge",
        "different_powers",
        "rastrigin_rotated",
        "weierstrass",
        "schaffers_f7",
        "schaffers_f7_ill",
        "griewank_rosenbrock",
        "schwefel",
        "gallagher_101",
        "gallagher_21",
        "katsuura",
        "lunacek_bi_rastrigin",
    ];
    NAMES.get(usize::from(fid).checked_sub(1)?).copied()
}

/// Peak layout of the Gallagher functions.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Peaks {
    pub centers: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Diagonal of `C_i`, already divided by `alpha_i^(1/4)`.
    pub scales: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Extra {
    None,
    Signs(Vec<f64>),
    Peaks(Peaks),
}

/// One benchmark problem: base function plus seeded transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    fid: u8,
    iid: u32,
    dim: usize,
    x_opt: Vec<f64>,
    f_opt: f64,
    rotation_seeds: (u64, u64),
    pub(crate) r: Option<Matrix>,
    pub(crate) q: Option<Matrix>,
    pub(crate) extra: Extra,
    /// Raw value at `x_opt`, subtracted so the optimum is exactly `f_opt`.
    offset: f64,
}

fn uses_r(fid: u8) -> bool {
    matches!(fid, 6 | 7 | 9..=19 | 21..=24)
}

fn uses_q(fid: u8) -> bool {
    matches!(fid, 6 | 7 | 13 | 15..=18 | 23 | 24)
}

fn random_rotation(dim: usize, seed: u64) -> Matrix {
    for attempt in 0u64.. {
        let mut rng = rng_for(seed, &[attempt]);
        let data = (0..dim * dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Some(q) = orthonormalize_rows(&Matrix::from_vec(dim, dim, data)) {
            return q;
        }
    }
    unreachable!()
}

/// Builds the deterministic instance `(fid, iid, dim)`.
pub fn make_instance(fid: u8, iid: u32, dim: usize) -> Result<ProblemInstance> {
    if !(1..=N_FUNCTIONS).contains(&fid) {
        return Err(Error::arg(format!("fid must be in 1..=24, got {fid}")));
    }
    if iid < 1 {
        return Err(Error::arg("iid must be >= 1"));
    }
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(Error::arg(format!("dim must be in 1..={MAX_DIM}, got {dim}")));
    }
    let base = split64(INSTANCE_SALT, &[u64::from(fid), u64::from(iid), dim as u64]);
    let mut rng = rng_for(base, &[0]);
    let x_opt: Vec<f64> = (0..dim).map(|_| rng.random_range(-4.0..=4.0)).collect();
    let rotation_seeds = (split64(base, &[1]), split64(base, &[2]));
    let r = uses_r(fid).then(|| random_rotation(dim, rotation_seeds.0));
    let q = uses_q(fid).then(|| random_rotation(dim, rotation_seeds.1));
    let mut extra_rng = rng_for(base, &[3]);
    let extra = match fid {
        20 | 24 => Extra::Signs((0..dim).map(|_| if extra_rng.random::<bool>() { 1.0 } else { -1.0 }).collect()),
        21 => Extra::Peaks(functions::gallagher_peaks(&x_opt, 101, &mut extra_rng)),
        22 => Extra::Peaks(functions::gallagher_peaks(&x_opt, 21, &mut extra_rng)),
        _ => Extra::None,
    };
    let mut inst = ProblemInstance { fid, iid, dim, x_opt, f_opt: 0.0, rotation_seeds, r, q, extra, offset: 0.0 };
    inst.offset = functions::raw_value(&inst, &inst.x_opt);
    Ok(inst)
}

impl ProblemInstance {
    pub fn fid(&self) -> u8 {
        self.fid
    }

    pub fn iid(&self) -> u32 {
        self.iid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x_opt(&self) -> &[f64] {
        &self.x_opt
    }

    pub fn f_opt(&self) -> f64 {
        self.f_opt
    }

    pub fn rotation_seeds(&self) -> (u64, u64) {
        self.rotation_seeds
    }

    pub fn group(&self) -> FunctionGroup {
        function_group(self.fid).expect("fid validated at construction")
    }

    /// Objective value at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::arg(format!("point has {} coordinates, instance has dim {}", x.len(), self.dim)));
        }
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::arg("NaN coordinate"));
        }
        Ok(functions::raw_value(self, x) - self.offset + self.f_opt)
    }

    /// Moves the optimum; used by fixtures that need a known `x_opt`.
    #[doc(hidden)]
    pub fn with_x_opt(mut self, x_opt: Vec<f64>) -> Self {
        assert_eq!(x_opt.len(), self.dim);
        if let Extra::Peaks(p) = &mut self.extra {
            p.centers[0] = x_opt.clone();
        }
        self.x_opt = x_opt;
        self.offset = 0.0;
        self.offset = functions::raw_value(&self, &self.x_opt);
        self
    }
}

/// Free-function form of [`ProblemInstance::evaluate`].
pub fn evaluate(instance: &ProblemInstance, x: &[f64]) -> Result<f64> {
    instance.evaluate(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn determinism_and_distinct_instances() {
        let a = make_instance(1, 1, 2).unwrap();
        let b = make_instance(1, 1, 2).unwrap();
        assert_eq!(a, b);
        let c = make_instance(1, 1, 5).unwrap();
        let d = make_instance(1, 2, 5).unwrap();
        assert_ne!(c.x_opt(), d.x_opt());
        assert!(c.x_opt().iter().all(|v| (-4.0..=4.0).contains(v)));
    }

    #[test]
    fn argument_errors() {
        assert!(make_instance(0, 1, 2).is_err());
        assert!(make_instance(25, 1, 2).is_err());
        assert!(make_instance(1, 0, 2).is_err());
        assert!(make_instance(1, 1, 0).is_err());
        let inst = make_instance(1, 1, 2).unwrap();
        assert!(inst.evaluate(&[0.0]).is_err());
        assert!(inst.evaluate(&[0.0, f64::NAN]).is_err());
    }

    #[test]
    fn optimum_is_zero_everywhere() {
        for dim in [1, 2, 3, 5, 10] {
            for fid in 1..=24 {
                for iid in 1..=5 {
                    let inst = make_instance(fid, iid, dim).unwrap();
                    let v = inst.evaluate(inst.x_opt()).unwrap();
                    assert!(v.abs() <= 1e-9, "f{fid} i{iid} d{dim}: {v}");
                }
            }
        }
    }

    #[test]
    fn sphere_unit_step() {
        let inst = make_instance(1, 3, 4).unwrap();
        let mut x = inst.x_opt().to_vec();
        x[0] += 1.0;
        assert!((inst.evaluate(&x).unwrap() - 1.0).abs() < 1e-12);
        let centered = make_instance(1, 1, 3).unwrap().with_x_opt(vec![0.0; 3]);
        assert_eq!(centered.evaluate(&[0.0; 3]).unwrap(), 0.0);
    }

    #[test]
    fn rotations_are_orthogonal() {
        let inst = make_instance(10, 2, 6).unwrap();
        let r = inst.r.as_ref().unwrap();
        let rrt = r.matmul(&r.transpose());
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((rrt[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn group_table() {
        use FunctionGroup::*;
        let expected = [
            (1..=5, Separable),
            (6..=9, LowModerateConditioning),
            (10..=14, HighConditioningUnimodal),
            (15..=19, MultimodalAdequateStructure),
            (20..=24, MultimodalWeakStructure),
        ];
        for (range, group) in expected {
            for fid in range {
                assert_eq!(function_group(fid), Some(group));
            }
        }
        assert_eq!(function_group(0), None);
        assert_eq!(modality(17), Some(Modality::HighlyMultimodal));
        assert_eq!(function_name(24), Some("lunacek_bi_rastrigin"));
    }
}
