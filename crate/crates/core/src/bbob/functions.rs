use alloc::vec::Vec;

use core::f64::consts::PI;
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng as _;

use super::transforms::{f_pen, lambda, ratio, t_asy, t_osz, t_osz_scalar};
use super::{Extra, Peaks, ProblemInstance};
use crate::seed::Rng;

/// Optimum coordinate of the one-dimensional Schwefel term, halved.
const SCHWEFEL_OPT: f64 = 4.209_687_463_3 / 2.0;
const LUNACEK_MU0: f64 = 2.5;

fn rastrigin(z: &[f64]) -> f64 {
    let d = z.len() as f64;
    let cos_sum: f64 = z.iter().map(|v| Float::cos(2.0 * PI * v)).sum();
    let sq: f64 = z.iter().map(|v| v * v).sum();
    10.0 * (d - cos_sum) + sq
}

fn rosenbrock(z: &[f64]) -> f64 {
    z.windows(2)
        .map(|w| {
            let a = w[0] * w[0] - w[1];
            let b = w[0] - 1.0;
            100.0 * a * a + b * b
        })
        .sum()
}

fn ellipsoid(z: &[f64]) -> f64 {
    let d = z.len();
    z.iter().enumerate().map(|(i, v)| Float::powf(10.0, 6.0 * ratio(i, d)) * v * v).sum()
}

fn schaffers(z: &[f64]) -> f64 {
    if z.len() < 2 {
        return 0.0;
    }
    let terms: f64 = z
        .windows(2)
        .map(|w| {
            let s = Float::sqrt(w[0] * w[0] + w[1] * w[1]);
            let rs = Float::sqrt(s);
            let sn = Float::sin(50.0 * Float::powf(s, 0.2));
            rs + rs * sn * sn
        })
        .sum();
    let m = terms / (z.len() - 1) as f64;
    m * m
}

fn weierstrass_term(z: f64) -> f64 {
    let mut acc = 0.0;
    let mut half = 1.0;
    let mut three = 1.0;
    for _ in 0..12 {
        acc += half * Float::cos(2.0 * PI * three * (z + 0.5));
        half *= 0.5;
        three *= 3.0;
    }
    acc
}

fn rotate(m: &Option<crate::linalg::Matrix>, x: &[f64]) -> Vec<f64> {
    match m {
        Some(m) => m.mul_vec(x),
        None => x.to_vec(),
    }
}

pub(super) fn gallagher_peaks(x_opt: &[f64], count: usize, rng: &mut Rng) -> Peaks {
    let d = x_opt.len();
    let (alpha_top, spread, box_scale) = if count == 101 { (1000.0, 99.0, 1.0) } else { (1000.0 * 1000.0, 19.0, 0.98) };
    let mut alphas: Vec<f64> = (0..count - 1).map(|j| Float::powf(1000.0, 2.0 * j as f64 / spread)).collect();
    alphas.shuffle(rng);
    let mut centers = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    let mut scales = Vec::with_capacity(count);
    for i in 0..count {
        let alpha = if i == 0 { alpha_top } else { alphas[i - 1] };
        let mut diag: Vec<f64> =
            (0..d).map(|j| Float::powf(alpha, 0.5 * ratio(j, d)) / Float::powf(alpha, 0.25)).collect();
        diag.shuffle(rng);
        scales.push(diag);
        if i == 0 {
            centers.push(x_opt.to_vec());
            weights.push(10.0);
        } else {
            centers.push((0..d).map(|_| rng.random_range(-5.0..5.0) * box_scale).collect());
            weights.push(1.1 + 8.0 * (i - 1) as f64 / (count - 2) as f64);
        }
    }
    Peaks { centers, weights, scales }
}

fn gallagher(inst: &ProblemInstance, peaks: &Peaks, x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let mut best: f64 = 0.0;
    let mut diff = alloc::vec![0.0; x.len()];
    for ((c, w), s) in peaks.centers.iter().zip(&peaks.weights).zip(&peaks.scales) {
        for ((o, a), b) in diff.iter_mut().zip(x).zip(c) {
            *o = a - b;
        }
        let u = rotate(&inst.r, &diff);
        let quad: f64 = u.iter().zip(s).map(|(v, si)| si * v * v).sum();
        best = best.max(w * Float::exp(-quad / (2.0 * d)));
    }
    let t = t_osz_scalar(10.0 - best);
    t * t + f_pen(x)
}

/// Function value before the optimum offset is removed.
pub(super) fn raw_value(inst: &ProblemInstance, x: &[f64]) -> f64 {
    let d = inst.dim();
    let df = d as f64;
    let s: Vec<f64> = x.iter().zip(inst.x_opt()).map(|(a, b)| a - b).collect();
    match inst.fid() {
        1 => s.iter().map(|v| v * v).sum(),
        2 => {
            let mut z = s;
            t_osz(&mut z);
            ellipsoid(&z)
        }
        3 => {
            let mut z = s;
            t_osz(&mut z);
            t_asy(&mut z, 0.2);
            lambda(&mut z, 10.0);
            rastrigin(&z)
        }
        4 => {
            let mut z = s;
            t_osz(&mut z);
            for (i, v) in z.iter_mut().enumerate() {
                let mut scale = Float::powf(10.0, 0.5 * ratio(i, d));
                if *v > 0.0 && i % 2 == 0 {
                    scale *= 10.0;
                }
                *v *= scale;
            }
            rastrigin(&z) + 100.0 * f_pen(x)
        }
        5 => {
            // Linear slope with its plateau anchored at x_opt instead of the box corner.
            x.iter()
                .zip(inst.x_opt())
                .enumerate()
                .map(|(i, (&xi, &oi))| {
                    let si = Float::signum(oi) * Float::powf(10.0, ratio(i, d));
                    let zi = if oi * xi < oi * oi { xi } else { oi };
                    Float::abs(si) * Float::abs(oi) - si * zi
                })
                .sum()
        }
        6 => {
            let mut z = rotate(&inst.r, &s);
            lambda(&mut z, 10.0);
            let z = rotate(&inst.q, &z);
            let acc: f64 = z
                .iter()
                .zip(inst.x_opt())
                .map(|(zi, oi)| {
                    let w = if zi * oi > 0.0 { 100.0 } else { 1.0 };
                    (w * zi) * (w * zi)
                })
                .sum();
            Float::powf(t_osz_scalar(acc), 0.9)
        }
        7 => {
            let mut zh = rotate(&inst.r, &s);
            lambda(&mut zh, 10.0);
            let zt: Vec<f64> = zh
                .iter()
                .map(|&v| if Float::abs(v) > 0.5 { Float::floor(0.5 + v) } else { Float::floor(0.5 + 10.0 * v) / 10.0 })
                .collect();
            let z = rotate(&inst.q, &zt);
            let e: f64 = z.iter().enumerate().map(|(i, v)| Float::powf(10.0, 2.0 * ratio(i, d)) * v * v).sum();
            0.1 * (Float::abs(zh[0]) / 1e4).max(e) + f_pen(x)
        }
        8 | 9 => {
            let scale = 1.0f64.max(Float::sqrt(df) / 8.0);
            let z: Vec<f64> = rotate(&inst.r, &s).iter().map(|v| scale * v + 1.0).collect();
            rosenbrock(&z)
        }
        10 => {
            let mut z = rotate(&inst.r, &s);
            t_osz(&mut z);
            ellipsoid(&z)
        }
        11 => {
            let mut z = rotate(&inst.r, &s);
            t_osz(&mut z);
            1e6 * z[0] * z[0] + z[1..].iter().map(|v| v * v).sum::<f64>()
        }
        12 => {
            let mut z = rotate(&inst.r, &s);
            t_asy(&mut z, 0.5);
            let z = rotate(&inst.r, &z);
            z[0] * z[0] + 1e6 * z[1..].iter().map(|v| v * v).sum::<f64>()
        }
        13 => {
            let mut z = rotate(&inst.r, &s);
            lambda(&mut z, 10.0);
            let z = rotate(&inst.q, &z);
            z[0] * z[0] + 100.0 * Float::sqrt(z[1..].iter().map(|v| v * v).sum::<f64>())
        }
        14 => {
            let z = rotate(&inst.r, &s);
            let acc: f64 =
                z.iter().enumerate().map(|(i, v)| Float::powf(Float::abs(*v), 2.0 + 4.0 * ratio(i, d))).sum();
            Float::sqrt(acc)
        }
        15 => {
            let mut z = rotate(&inst.r, &s);
            t_osz(&mut z);
            t_asy(&mut z, 0.2);
            let mut z = rotate(&inst.q, &z);
            lambda(&mut z, 10.0);
            rastrigin(&rotate(&inst.r, &z))
        }
        16 => {
            let mut z = rotate(&inst.r, &s);
            t_osz(&mut z);
            let mut z = rotate(&inst.q, &z);
            lambda(&mut z, 0.01);
            let z = rotate(&inst.r, &z);
            let f0 = weierstrass_term(0.0);
            let m = z.iter().map(|v| weierstrass_term(*v)).sum::<f64>() / df - f0;
            10.0 * m * m * m + 10.0 / df * f_pen(x)
        }
        17 | 18 => {
            let cond = if inst.fid() == 17 { 10.0 } else { 1000.0 };
            let mut z = rotate(&inst.r, &s);
            t_asy(&mut z, 0.5);
            let mut z = rotate(&inst.q, &z);
            lambda(&mut z, cond);
            schaffers(&z) + 10.0 * f_pen(x)
        }
        19 => {
            if d < 2 {
                return 0.0;
            }
            let scale = 1.0f64.max(Float::sqrt(df) / 8.0);
            let z: Vec<f64> = rotate(&inst.r, &s).iter().map(|v| scale * v + 1.0).collect();
            let acc: f64 = z
                .windows(2)
                .map(|w| {
                    let a = w[0] * w[0] - w[1];
                    let b = w[0] - 1.0;
                    let si = 100.0 * a * a + b * b;
                    si / 4000.0 - Float::cos(si)
                })
                .sum();
            10.0 / (df - 1.0) * acc + 10.0
        }
        20 => {
            let Extra::Signs(signs) = &inst.extra else { unreachable!() };
            let two_opt = 2.0 * SCHWEFEL_OPT;
            let xh: Vec<f64> = s.iter().zip(signs).map(|(v, sg)| 2.0 * sg * v + two_opt).collect();
            let mut zh = xh.clone();
            for i in 1..d {
                zh[i] = xh[i] + 0.25 * (xh[i - 1] - two_opt);
            }
            let mut c: Vec<f64> = zh.iter().map(|v| v - two_opt).collect();
            lambda(&mut c, 10.0);
            let z: Vec<f64> = c.iter().map(|v| 100.0 * (v + two_opt)).collect();
            let zs: Vec<f64> = z.iter().map(|v| v / 100.0).collect();
            let acc: f64 = z.iter().map(|v| v * Float::sin(Float::sqrt(Float::abs(*v)))).sum();
            -acc / (100.0 * df) + 4.189_828_872_724_339 + 100.0 * f_pen(&zs)
        }
        21 | 22 => {
            let Extra::Peaks(peaks) = &inst.extra else { unreachable!() };
            gallagher(inst, peaks, x)
        }
        23 => {
            let mut z = rotate(&inst.r, &s);
            lambda(&mut z, 100.0);
            let z = rotate(&inst.q, &z);
            let expo = 10.0 / Float::powf(df, 1.2);
            let mut prod = 1.0;
            for (i, v) in z.iter().enumerate() {
                let mut acc = 0.0;
                let mut p = 2.0;
                for _ in 0..32 {
                    let t = p * v;
                    acc += Float::abs(t - Float::round(t)) / p;
                    p *= 2.0;
                }
                prod *= Float::powf(1.0 + (i + 1) as f64 * acc, expo);
            }
            10.0 / (df * df) * prod - 10.0 / (df * df) + f_pen(x)
        }
        24 => {
            let Extra::Signs(signs) = &inst.extra else { unreachable!() };
            let sfac = 1.0 - 1.0 / (2.0 * Float::sqrt(df + 20.0) - 8.2);
            let mu1 = -Float::sqrt((LUNACEK_MU0 * LUNACEK_MU0 - 1.0) / sfac);
            // x_hat - mu0, anchored so that x_opt maps to mu0
            let dev: Vec<f64> = s.iter().zip(signs).map(|(v, sg)| 2.0 * sg * v).collect();
            let first: f64 = dev.iter().map(|v| v * v).sum();
            let second: f64 = df
                + sfac
                    * dev
                        .iter()
                        .map(|v| {
                            let t = v + LUNACEK_MU0 - mu1;
                            t * t
                        })
                        .sum::<f64>();
            let mut z = rotate(&inst.r, &dev);
            lambda(&mut z, 100.0);
            let z = rotate(&inst.q, &z);
            let cos_sum: f64 = z.iter().map(|v| Float::cos(2.0 * PI * v)).sum();
            first.min(second) + 10.0 * (df - cos_sum) + 1e4 * f_pen(x)
        }
        _ => unreachable!("fid validated at construction"),
    }
}

#[cfg(test)]
mod tests {
    use super::super::make_instance;
    use alloc::vec;
    use alloc::vec::Vec;

    /// Separable Rastrigin written out directly from its definition.
    fn rastrigin_f3_direct(x: &[f64], x_opt: &[f64]) -> f64 {
        let d = x.len();
        let mut total_cos = 0.0;
        let mut total_sq = 0.0;
        for i in 0..d {
            let u = x[i] - x_opt[i];
            let osz = if u == 0.0 {
                0.0
            } else {
                let h = u.abs().ln();
                let (c1, c2) = if u > 0.0 { (10.0, 7.9) } else { (5.5, 3.1) };
                u.signum() * (h + 0.049 * ((c1 * h).sin() + (c2 * h).sin())).exp()
            };
            let e = i as f64 / (d as f64 - 1.0);
            let asy = if osz > 0.0 { osz.powf(1.0 + 0.2 * e * osz.sqrt()) } else { osz };
            let z = 10f64.powf(0.5 * e) * asy;
            total_cos += (2.0 * core::f64::consts::PI * z).cos();
            total_sq += z * z;
        }
        10.0 * (d as f64 - total_cos) + total_sq
    }

    #[test]
    fn rastrigin_matches_direct_transcription() {
        let inst = make_instance(3, 2, 3).unwrap();
        let points: Vec<Vec<f64>> = vec![vec![0.3, -1.2, 2.5], vec![-4.0, 4.0, 0.0], vec![1.0, 1.0, 1.0]];
        for p in points {
            let want = rastrigin_f3_direct(&p, inst.x_opt());
            let got = inst.evaluate(&p).unwrap();
            assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{got} vs {want}");
        }
    }

    #[test]
    fn weierstrass_reference_constant() {
        // f0 = sum_k 2^-k cos(pi 3^k) = -(2 - 2^-11)
        let f0 = super::weierstrass_term(0.0);
        assert!((f0 + 2.0 - 2f64.powi(-11)).abs() < 1e-12);
    }

    #[test]
    fn linear_slope_plateau() {
        let inst = make_instance(5, 1, 2).unwrap();
        let o = inst.x_opt().to_vec();
        // Moving past the optimum along the slope direction stays on the plateau.
        let beyond: Vec<f64> = o.iter().map(|v| v + v.signum()).collect();
        assert!(inst.evaluate(&beyond).unwrap().abs() < 1e-12);
        let before: Vec<f64> = o.iter().map(|v| v - v.signum()).collect();
        assert!(inst.evaluate(&before).unwrap() > 0.0);
    }
}
