//! Small numerically careful reductions shared across modules.

use num_traits::Float;

/// Neumaier-compensated sum.
pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = s + v;
        if Float::abs(s) >= Float::abs(v) {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

pub fn mean(values: &[f64]) -> f64 {
    sum(values.iter().copied()) / values.len() as f64
}

/// Population standard deviation (divides by N).
pub fn pop_std(values: &[f64]) -> f64 {
    let m = mean(values);
    Float::sqrt(sum(values.iter().map(|v| (v - m) * (v - m))) / values.len() as f64)
}

/// Sample standard deviation (divides by N - 1).
pub fn sample_sd(values: &[f64]) -> f64 {
    let m = mean(values);
    Float::sqrt(sum(values.iter().map(|v| (v - m) * (v - m))) / (values.len() as f64 - 1.0))
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    debug_assert_eq!(a.len(), b.len());
    let ma = mean(a);
    let mb = mean(b);
    let sab = sum(a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)));
    let saa = sum(a.iter().map(|x| (x - ma) * (x - ma)));
    let sbb = sum(b.iter().map(|y| (y - mb) * (y - mb)));
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / Float::sqrt(saa * sbb))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(sum(v), 2.0);
    }

    #[test]
    fn std_conventions() {
        let v = [0.2, 0.3];
        assert!((pop_std(&v) - 0.05).abs() < 1e-15);
        assert!((sample_sd(&v) - 0.05 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pearson_degenerate() {
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
    }
}
