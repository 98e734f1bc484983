//! Design-space sampling for landscape analysis.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::sobol::{sobol_points, SOBOL_MAX_DIM};
use super::{ProblemInstance, DOMAIN};
use crate::linalg::Matrix;
use crate::seed::rng_for;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplingMethod {
    Uniform,
    LatinHypercube,
    Sobol,
}

impl SamplingMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplingMethod::Uniform => "uniform",
            SamplingMethod::LatinHypercube => "latin_hypercube",
            SamplingMethod::Sobol => "sobol",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform" => Some(SamplingMethod::Uniform),
            "latin_hypercube" | "lhs" => Some(SamplingMethod::LatinHypercube),
            "sobol" => Some(SamplingMethod::Sobol),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleProvenance {
    pub fid: u8,
    pub iid: u32,
    pub dim: usize,
    pub sample_seed: u64,
    pub method: SamplingMethod,
}

/// Design points inside the domain box and their objective values.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub provenance: Option<SampleProvenance>,
}

impl SampleSet {
    /// A sample without instance provenance, e.g. for fixtures.
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::arg(format!("{} design points but {} objective values", x.rows(), y.len())));
        }
        Ok(Self { x, y, provenance: None })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }
}

/// `n` points in `[0, 1)^dim`.
pub fn sample_unit_points(n: usize, dim: usize, seed: u64, method: SamplingMethod) -> Result<Matrix> {
    let mut rng = rng_for(seed, &[dim as u64, n as u64]);
    Ok(match method {
        SamplingMethod::Uniform => {
            let data = (0..n * dim).map(|_| rng.random::<f64>()).collect();
            Matrix::from_vec(n, dim, data)
        }
        SamplingMethod::LatinHypercube => {
            let mut m = Matrix::zeros(n, dim);
            let mut perm: Vec<usize> = (0..n).collect();
            for j in 0..dim {
                perm.shuffle(&mut rng);
                for (i, &bin) in perm.iter().enumerate() {
                    let u: f64 = rng.random();
                    // Keep the jittered point strictly inside its bin.
                    let v = (bin as f64 + u) / n as f64;
                    let upper = (bin + 1) as f64 / n as f64;
                    m[(i, j)] = if v >= upper { bin as f64 / n as f64 } else { v };
                }
            }
            m
        }
        SamplingMethod::Sobol => {
            if dim > SOBOL_MAX_DIM {
                return Err(Error::arg(format!("Sobol sampling supports at most {SOBOL_MAX_DIM} dimensions")));
            }
            let shifts: Vec<u32> = (0..dim).map(|_| rng.random()).collect();
            sobol_points(n, dim, Some(&shifts))
        }
    })
}

/// Samples `n` points from the domain box of `instance` and evaluates them.
pub fn sample_instance(instance: &ProblemInstance, n: usize, seed: u64, method: SamplingMethod) -> Result<SampleSet> {
    if n < 2 {
        return Err(Error::arg("sample size must be at least 2"));
    }
    let dim = instance.dim();
    let unit = sample_unit_points(n, dim, seed, method)?;
    let (lo, hi) = DOMAIN;
    let data: Vec<f64> = unit.as_slice().iter().map(|u| lo + (hi - lo) * u).collect();
    let x = Matrix::from_vec(n, dim, data);
    let y = x.iter_rows().map(|r| instance.evaluate(r)).collect::<Result<Vec<_>>>()?;
    Ok(SampleSet {
        x,
        y,
        provenance: Some(SampleProvenance { fid: instance.fid(), iid: instance.iid(), dim, sample_seed: seed, method }),
    })
}

#[cfg(test)]
mod tests {
    use super::super::make_instance;
    use super::*;

    #[test]
    fn latin_hypercube_one_point_per_bin() {
        let inst = make_instance(1, 1, 1).unwrap();
        for seed in 0..20 {
            let s = sample_instance(&inst, 4, seed, SamplingMethod::LatinHypercube).unwrap();
            let mut bins = [0; 4];
            for i in 0..4 {
                let x = s.x[(i, 0)];
                let b = if x < -2.5 {
                    0
                } else if x < 0.0 {
                    1
                } else if x < 2.5 {
                    2
                } else {
                    3
                };
                bins[b] += 1;
            }
            assert_eq!(bins, [1, 1, 1, 1]);
        }
    }

    #[test]
    fn latin_hypercube_stratifies_every_coordinate() {
        let m = sample_unit_points(97, 6, 3, SamplingMethod::LatinHypercube).unwrap();
        for j in 0..6 {
            let mut seen = alloc::vec![false; 97];
            for i in 0..97 {
                let b = (m[(i, j)] * 97.0) as usize;
                assert!(!seen[b]);
                seen[b] = true;
            }
        }
    }

    #[test]
    fn same_seed_same_sample() {
        let inst = make_instance(7, 2, 3).unwrap();
        for method in [SamplingMethod::Uniform, SamplingMethod::LatinHypercube, SamplingMethod::Sobol] {
            let a = sample_instance(&inst, 50, 9, method).unwrap();
            let b = sample_instance(&inst, 50, 9, method).unwrap();
            assert_eq!(a, b);
            assert!(a.x.as_slice().iter().all(|v| (-5.0..=5.0).contains(v)));
            assert_eq!(a.len(), 50);
        }
    }

    #[test]
    fn uniform_mean_near_center() {
        let inst = make_instance(1, 1, 2).unwrap();
        let s = sample_instance(&inst, 10_000, 1, SamplingMethod::Uniform).unwrap();
        for j in 0..2 {
            let m = crate::stats::mean(&s.x.column(j));
            assert!(m.abs() < 0.15, "coordinate {j} mean {m}");
        }
    }

    #[test]
    fn too_small_and_too_wide() {
        let inst = make_instance(1, 1, 2).unwrap();
        assert!(sample_instance(&inst, 1, 0, SamplingMethod::Uniform).is_err());
        let wide = make_instance(1, 1, 22).unwrap();
        assert!(sample_instance(&wide, 10, 0, SamplingMethod::Sobol).is_err());
    }
}
