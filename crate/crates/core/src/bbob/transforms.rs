//! The standard BBOB variable transformations.

use num_traits::Float;

/// `i / (d - 1)` with the one-dimensional case pinned to 0.
#[inline]
pub(crate) fn ratio(i: usize, d: usize) -> f64 {
    if d > 1 {
        i as f64 / (d - 1) as f64
    } else {
        0.0
    }
}

/// Oscillation transform applied to one coordinate.
#[inline]
pub fn t_osz_scalar(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let xh = Float::ln(Float::abs(x));
    let (c1, c2) = if x > 0.0 { (10.0, 7.9) } else { (5.5, 3.1) };
    Float::signum(x) * Float::exp(xh + 0.049 * (Float::sin(c1 * xh) + Float::sin(c2 * xh)))
}

pub fn t_osz(x: &mut [f64]) {
    for v in x {
        *v = t_osz_scalar(*v);
    }
}

/// Asymmetry transform with strength `beta`.
pub fn t_asy(x: &mut [f64], beta: f64) {
    let d = x.len();
    for (i, v) in x.iter_mut().enumerate() {
        if *v > 0.0 {
            *v = Float::powf(*v, 1.0 + beta * ratio(i, d) * Float::sqrt(*v));
        }
    }
}

/// Multiplies by the diagonal conditioning matrix with entries
/// `alpha^(i / (2 (d - 1)))`.
pub fn lambda(x: &mut [f64], alpha: f64) {
    let d = x.len();
    for (i, v) in x.iter_mut().enumerate() {
        *v *= Float::powf(alpha, 0.5 * ratio(i, d));
    }
}

/// Boundary penalty `sum max(0, |x_i| - 5)^2`.
pub fn f_pen(x: &[f64]) -> f64 {
    x.iter()
        .map(|v| {
            let e = Float::abs(*v) - 5.0;
            if e > 0.0 {
                e * e
            } else {
                0.0
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_osz_is_odd_monotone_and_fixes_zero() {
        assert_eq!(t_osz_scalar(0.0), 0.0);
        let mut prev = f64::NEG_INFINITY;
        for i in -200..=200 {
            let x = i as f64 * 0.05;
            let y = t_osz_scalar(x);
            assert!(y > prev);
            if x != 0.0 {
                assert_eq!(y.signum(), x.signum());
            }
            prev = y;
        }
        // T_osz(1) = exp(0) = 1.
        assert_eq!(t_osz_scalar(1.0), 1.0);
    }

    #[test]
    fn t_asy_leaves_first_and_negative_coordinates() {
        let mut x = [2.0, -3.0, 4.0];
        t_asy(&mut x, 0.5);
        assert_eq!(x[0], 2.0);
        assert_eq!(x[1], -3.0);
        assert!((x[2] - 4f64.powf(1.0 + 0.5 * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn penalty_only_outside_box() {
        assert_eq!(f_pen(&[4.9, -5.0, 0.0]), 0.0);
        assert!((f_pen(&[6.0, -7.0]) - 5.0).abs() < 1e-15);
    }
}
