//! Raw function bodies (value minus `fopt`).

use std::f64::consts::PI;

use super::transforms::{
    conditioning, f_pen, mat_vec, scale_in_place, t_asy, t_osz, t_osz_scalar,
};
use super::{rosenbrock_scale, BbobInstance, LUNACEK_MU0};

pub(super) fn raw(inst: &BbobInstance, x: &[f64]) -> f64 {
    let d = inst.dim;
    let t = &inst.transform;
    let shifted: Vec<f64> = x.iter().zip(&inst.xopt).map(|(a, b)| a - b).collect();
    match inst.fid {
        1 => shifted.iter().map(|z| z * z).sum(),
        2 => {
            let mut z = shifted;
            t_osz(&mut z);
            ellipsoid(&z, 1e6)
        }
        3 => {
            let mut z = shifted;
            t_osz(&mut z);
            t_asy(&mut z, 0.2);
            scale_in_place(&mut z, &conditioning(10.0, d));
            rastrigin(&z)
        }
        4 => {
            let mut z = shifted;
            t_osz(&mut z);
            let cond = conditioning(10.0, d);
            for (i, v) in z.iter_mut().enumerate() {
                let s = if *v > 0.0 && i % 2 == 0 { 10.0 * cond[i] } else { cond[i] };
                *v *= s;
            }
            rastrigin(&z) + 100.0 * f_pen(x)
        }
        5 => {
            let denom = (d - 1) as f64;
            let mut f = 0.0;
            for i in 0..d {
                let xo = inst.xopt[i];
                let s = xo.signum() * 10f64.powf(i as f64 / denom);
                let z = if xo * x[i] < 25.0 { x[i] } else { xo };
                f += 5.0 * s.abs() - s * z;
            }
            f
        }
        6 => {
            let mut z = mat_vec(&t.rotation, &shifted);
            scale_in_place(&mut z, &conditioning(10.0, d));
            let z = mat_vec(&t.rotation2, &z);
            let s: f64 = z
                .iter()
                .zip(&inst.xopt)
                .map(|(zi, xo)| {
                    let si = if zi * xo > 0.0 { 100.0 } else { 1.0 };
                    (si * zi) * (si * zi)
                })
                .sum();
            t_osz_scalar(s).powf(0.9)
        }
        7 => {
            let mut zh = mat_vec(&t.rotation, &shifted);
            scale_in_place(&mut zh, &conditioning(10.0, d));
            let zt: Vec<f64> = zh
                .iter()
                .map(|&v| {
                    if v.abs() > 0.5 {
                        (0.5 + v).floor()
                    } else {
                        (0.5 + 10.0 * v).floor() / 10.0
                    }
                })
                .collect();
            let z = mat_vec(&t.rotation2, &zt);
            0.1 * (zh[0].abs() / 1e4).max(ellipsoid(&z, 1e2)) + f_pen(x)
        }
        8 => {
            let s = rosenbrock_scale(d);
            let z: Vec<f64> = shifted.iter().map(|v| s * v + 1.0).collect();
            rosenbrock(&z)
        }
        9 => {
            let s = rosenbrock_scale(d);
            let z: Vec<f64> = mat_vec(&t.rotation, x).iter().map(|v| s * v + 0.5).collect();
            rosenbrock(&z)
        }
        10 => {
            let mut z = mat_vec(&t.rotation, &shifted);
            t_osz(&mut z);
            ellipsoid(&z, 1e6)
        }
        11 => {
            let mut z = mat_vec(&t.rotation, &shifted);
            t_osz(&mut z);
            1e6 * z[0] * z[0] + z[1..].iter().map(|v| v * v).sum::<f64>()
        }
        12 => {
            let mut z = mat_vec(&t.rotation, &shifted);
            t_asy(&mut z, 0.5);
            let z = mat_vec(&t.rotation, &z);
            z[0] * z[0] + 1e6 * z[1..].iter().map(|v| v * v).sum::<f64>()
        }
        13 => {
            let mut z = mat_vec(&t.rotation, &shifted);
            scale_in_place(&mut z, &conditioning(10.0, d));
            let z = mat_vec(&t.rotation2, &z);
            z[0] * z[0] + 100.0 * z[1..].iter().map(|v| v * v).sum::<f64>().sqrt()
        }
        14 => {
            let z = mat_vec(&t.rotation, &shifted);
            let denom = (d - 1) as f64;
            z.iter()
                .enumerate()
                .map(|(i, v)| v.abs().powf(2.0 + 4.0 * i as f64 / denom))
                .sum::<f64>()
                .sqrt()
        }
        15 => {
            let mut z = mat_vec(&t.rotation, &shifted);
            t_osz(&mut z);
            t_asy(&mut z, 0.2);
            let mut z = mat_vec(&t.rotation2, &z);
            scale_in_place(&mut z, &conditioning(10.0, d));
            let z = mat_vec(&t.rotation, &z);
            rastrigin(&z)
        }
        16 => {
            let mut z = mat_vec(&t.rotation, &shifted);
            t_osz(&mut z);
            let mut z = mat_vec(&t.rotation2, &z);
            scale_in_place(&mut z, &conditioning(0.01, d));
            let z = mat_vec(&t.rotation, &z);
            let f0 = weierstrass_inner(0.0);
            let s = z.iter().map(|&v| weierstrass_inner(v)).sum::<f64>() / d as f64;
            10.0 * (s - f0).powi(3) + 10.0 / d as f64 * f_pen(x)
        }
        17 | 18 => {
            let alpha = if inst.fid == 17 { 10.0 } else { 1000.0 };
            let mut z = mat_vec(&t.rotation, &shifted);
            t_asy(&mut z, 0.5);
            let mut z = mat_vec(&t.rotation2, &z);
            scale_in_place(&mut z, &conditioning(alpha, d));
            let mut acc = 0.0;
            for i in 0..d - 1 {
                let s = (z[i] * z[i] + z[i + 1] * z[i + 1]).sqrt();
                let sq = s.sqrt();
                let sn = (50.0 * s.powf(0.2)).sin();
                acc += sq + sq * sn * sn;
            }
            let m = acc / (d - 1) as f64;
            m * m + 10.0 * f_pen(x)
        }
        19 => {
            let s = rosenbrock_scale(d);
            let z: Vec<f64> = mat_vec(&t.rotation, x).iter().map(|v| s * v + 0.5).collect();
            let mut acc = 0.0;
            for i in 0..d - 1 {
                let a = z[i] * z[i] - z[i + 1];
                let si = 100.0 * a * a + (z[i] - 1.0) * (z[i] - 1.0);
                acc += si / 4000.0 - si.cos();
            }
            10.0 * acc / (d - 1) as f64 + 10.0
        }
        20 => {
            let two_abs: Vec<f64> = inst.xopt.iter().map(|v| 2.0 * v.abs()).collect();
            let xh: Vec<f64> = x.iter().zip(&t.signs).map(|(a, s)| 2.0 * s * a).collect();
            let mut zh = xh.clone();
            for i in 1..d {
                zh[i] = xh[i] + 0.25 * (xh[i - 1] - two_abs[i - 1]);
            }
            let cond = conditioning(10.0, d);
            let z: Vec<f64> = (0..d)
                .map(|i| 100.0 * (cond[i] * (zh[i] - two_abs[i]) + two_abs[i]))
                .collect();
            let s: f64 = z.iter().map(|v| v * v.abs().sqrt().sin()).sum();
            let scaled: Vec<f64> = z.iter().map(|v| v / 100.0).collect();
            -s / (100.0 * d as f64) + 4.189828872724339 + 100.0 * f_pen(&scaled)
        }
        21 | 22 => {
            let peaks = t.peaks.as_ref().expect("gallagher instance carries peaks");
            let rx = mat_vec(&t.rotation, x);
            let mut best = f64::NEG_INFINITY;
            for ((w, rc), diag) in peaks
                .weights
                .iter()
                .zip(&peaks.rotated_centers)
                .zip(&peaks.scales)
            {
                let q: f64 = rx
                    .iter()
                    .zip(rc)
                    .zip(diag)
                    .map(|((a, b), s)| s * (a - b) * (a - b))
                    .sum();
                best = best.max(w * (-q / (2.0 * d as f64)).exp());
            }
            let v = t_osz_scalar(10.0 - best);
            v * v + f_pen(x)
        }
        23 => {
            let mut z = mat_vec(&t.rotation, &shifted);
            scale_in_place(&mut z, &conditioning(100.0, d));
            let z = mat_vec(&t.rotation2, &z);
            let df = d as f64;
            let expo = 10.0 / df.powf(1.2);
            let mut prod = 1.0;
            for (i, &zi) in z.iter().enumerate() {
                let mut s = 0.0;
                let mut p = 1.0;
                for _ in 1..=32 {
                    p *= 2.0;
                    let v = p * zi;
                    s += (v - v.round()).abs() / p;
                }
                prod *= (1.0 + (i + 1) as f64 * s).powf(expo);
            }
            10.0 / (df * df) * (prod - 1.0) + f_pen(x)
        }
        24 => {
            let df = d as f64;
            let s = 1.0 - 1.0 / (2.0 * (df + 20.0).sqrt() - 8.2);
            let mu1 = -((LUNACEK_MU0 * LUNACEK_MU0 - 1.0) / s).sqrt();
            let xh: Vec<f64> = x
                .iter()
                .zip(&inst.xopt)
                .map(|(a, xo)| 2.0 * xo.signum() * a)
                .collect();
            let centred: Vec<f64> = xh.iter().map(|v| v - LUNACEK_MU0).collect();
            let mut z = mat_vec(&t.rotation, &centred);
            scale_in_place(&mut z, &conditioning(100.0, d));
            let z = mat_vec(&t.rotation2, &z);
            let a: f64 = centred.iter().map(|v| v * v).sum();
            let b: f64 = df + s * xh.iter().map(|v| (v - mu1) * (v - mu1)).sum::<f64>();
            let c: f64 = z.iter().map(|v| (2.0 * PI * v).cos()).sum();
            a.min(b) + 10.0 * (df - c) + 1e4 * f_pen(x)
        }
        _ => unreachable!("fid validated at instantiation"),
    }
}

fn ellipsoid(z: &[f64], cond: f64) -> f64 {
    let denom = (z.len() - 1) as f64;
    z.iter()
        .enumerate()
        .map(|(i, v)| cond.powf(i as f64 / denom) * v * v)
        .sum()
}

fn rastrigin(z: &[f64]) -> f64 {
    let d = z.len() as f64;
    let c: f64 = z.iter().map(|v| (2.0 * PI * v).cos()).sum();
    10.0 * (d - c) + z.iter().map(|v| v * v).sum::<f64>()
}

fn rosenbrock(z: &[f64]) -> f64 {
    z.windows(2)
        .map(|w| {
            let a = w[0] * w[0] - w[1];
            100.0 * a * a + (w[0] - 1.0) * (w[0] - 1.0)
        })
        .sum()
}

fn weierstrass_inner(z: f64) -> f64 {
    let mut s = 0.0;
    let mut amp = 1.0;
    let mut freq = 1.0;
    for _ in 0..12 {
        s += amp * (2.0 * PI * freq * (z + 0.5)).cos();
        amp *= 0.5;
        freq *= 3.0;
    }
    s
}
