//! Shape of the objective value distribution.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;

use super::FamilyOutput;
use crate::bbob::SampleSet;
use crate::{stats, Error, Result};

pub const DISTR_NAMES: [&str; 3] = ["ela_distr.skewness", "ela_distr.kurtosis", "ela_distr.number_of_peaks"];

const KDE_GRID: usize = 512;
const MODE_MASS: f64 = 0.01;

fn central_moments(y: &[f64]) -> (f64, f64, f64) {
    let m = stats::mean(y);
    let n = y.len() as f64;
    let m2 = stats::sum(y.iter().map(|v| (v - m).powi(2))) / n;
    let m3 = stats::sum(y.iter().map(|v| (v - m).powi(3))) / n;
    let m4 = stats::sum(y.iter().map(|v| (v - m).powi(4))) / n;
    (m2, m3, m4)
}

/// `m3 / m2^(3/2)`; zero for constant values.
pub fn skewness(y: &[f64]) -> f64 {
    let (m2, m3, _) = central_moments(y);
    if m2 == 0.0 {
        0.0
    } else {
        m3 / Float::powf(m2, 1.5)
    }
}

/// Excess kurtosis `m4 / m2^2 - 3`; NaN for constant values.
pub fn kurtosis(y: &[f64]) -> f64 {
    let (m2, _, m4) = central_moments(y);
    if m2 == 0.0 {
        f64::NAN
    } else {
        m4 / (m2 * m2) - 3.0
    }
}

/// Modes of a Gaussian KDE of `y` holding at least 1% of the mass.
pub fn number_of_peaks(y: &[f64]) -> usize {
    let n = y.len();
    let sd = stats::sample_sd(y);
    let h = 1.06 * sd * Float::powf(n as f64, -0.2);
    if !(h > 0.0) {
        return 1;
    }
    let lo = y.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let step = (hi - lo) / (KDE_GRID - 1) as f64;
    let norm = 1.0 / (n as f64 * h * Float::sqrt(2.0 * core::f64::consts::PI));
    let density: Vec<f64> = (0..KDE_GRID)
        .map(|k| {
            let g = lo + step * k as f64;
            norm * stats::sum(y.iter().map(|v| {
                let u = (g - v) / h;
                Float::exp(-0.5 * u * u)
            }))
        })
        .collect();
    // Segment boundaries: the grid ends and every interior local minimum.
    let mut bounds = alloc::vec![0];
    for k in 1..KDE_GRID - 1 {
        if density[k] < density[k - 1] && density[k] <= density[k + 1] {
            bounds.push(k);
        }
    }
    bounds.push(KDE_GRID - 1);
    let trapezoid = |a: usize, b: usize| stats::sum((a..b).map(|k| 0.5 * step * (density[k] + density[k + 1])));
    let total = trapezoid(0, KDE_GRID - 1);
    let peaks = bounds.windows(2).filter(|w| trapezoid(w[0], w[1]) >= MODE_MASS * total).count();
    peaks.max(1)
}

pub fn ela_distr(sample: &SampleSet) -> Result<FamilyOutput> {
    let y = &sample.y;
    if y.len() < 4 {
        return Err(Error::arg(format!("value distribution needs at least 4 points, got {}", y.len())));
    }
    let mut out = FamilyOutput::new(&DISTR_NAMES);
    out.set("ela_distr.skewness", skewness(y));
    let k = kurtosis(y);
    if k.is_nan() {
        out.warn("constant objective values; kurtosis undefined");
    }
    out.set("ela_distr.kurtosis", k);
    out.set("ela_distr.number_of_peaks", number_of_peaks(y) as f64);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::seed::rng_for;
    use alloc::vec;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn moments_by_hand() {
        assert_eq!(skewness(&[-1.0, 0.0, 1.0]), 0.0);
        // mean 1, m2 = 2, m3 = 2: 2 / 2^1.5.
        assert!((skewness(&[0.0, 0.0, 3.0]) - 1.0 / 2.0f64.sqrt()).abs() < 1e-15);
        assert!((kurtosis(&[-1.0, 1.0, -1.0, 1.0]) + 2.0).abs() < 1e-15);
        assert_eq!(skewness(&[2.0; 5]), 0.0);
        assert!(kurtosis(&[2.0; 5]).is_nan());
    }

    fn gaussian(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_for(seed, &[]);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn unimodal_and_bimodal() {
        assert_eq!(number_of_peaks(&gaussian(1000, 5)), 1);
        let mut two = gaussian(500, 6);
        two.extend(gaussian(500, 7).iter().map(|v| v + 12.0));
        assert_eq!(number_of_peaks(&two), 2);
        assert_eq!(number_of_peaks(&[3.0; 10]), 1);
    }

    #[test]
    fn shift_invariance() {
        let y = gaussian(300, 8);
        let z: Vec<f64> = y.iter().map(|v| v + 1e3).collect();
        assert!((skewness(&y) - skewness(&z)).abs() < 1e-9);
        assert_eq!(number_of_peaks(&y), number_of_peaks(&z));
    }

    #[test]
    fn too_small() {
        let s = SampleSet::new(Matrix::zeros(3, 1), vec![1.0, 2.0, 3.0]).unwrap();
        assert!(ela_distr(&s).is_err());
    }
}
