//! Building blocks shared by the BBOB functions: oscillation and asymmetry
//! nonlinearities, conditioning diagonals, boundary penalty and random
//! orthogonal matrices.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Oscillation transform `T_osz` for one coordinate.
pub fn t_osz_scalar(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let xh = x.abs().ln();
    let (c1, c2) = if x > 0.0 { (10.0, 7.9) } else { (5.5, 3.1) };
    x.signum() * (xh + 0.049 * ((c1 * xh).sin() + (c2 * xh).sin())).exp()
}

pub fn t_osz(x: &mut [f64]) {
    for v in x.iter_mut() {
        *v = t_osz_scalar(*v);
    }
}

/// Asymmetry transform `T_asy^beta`.
pub fn t_asy(x: &mut [f64], beta: f64) {
    let d = x.len();
    let denom = (d - 1).max(1) as f64;
    for (i, v) in x.iter_mut().enumerate() {
        if *v > 0.0 {
            *v = v.powf(1.0 + beta * i as f64 / denom * v.sqrt());
        }
    }
}

/// Diagonal of `Lambda^alpha`: `alpha^(0.5 i / (d - 1))`.
pub fn conditioning(alpha: f64, d: usize) -> Vec<f64> {
    let denom = (d - 1).max(1) as f64;
    (0..d)
        .map(|i| alpha.powf(0.5 * i as f64 / denom))
        .collect()
}

pub fn scale_in_place(x: &mut [f64], diag: &[f64]) {
    for (v, s) in x.iter_mut().zip(diag) {
        *v *= s;
    }
}

/// Boundary penalty `sum max(0, |x_i| - 5)^2`.
pub fn f_pen(x: &[f64]) -> f64 {
    x.iter()
        .map(|v| {
            let e = v.abs() - 5.0;
            if e > 0.0 {
                e * e
            } else {
                0.0
            }
        })
        .sum()
}

/// `m * x` for a square matrix.
pub fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let mut out = vec![0.0; d];
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        let col = m.column(j);
        for i in 0..d {
            out[i] += col[i] * xj;
        }
    }
    out
}

/// `m^T * x`.
pub fn mat_t_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..x.len()).map(|j| m.column(j).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// Orthogonal matrix from the QR factorization of a standard normal matrix;
/// columns are sign-fixed so the R factor has a positive diagonal.
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn t_osz_fixes_zero_and_sign() {
        assert_eq!(t_osz_scalar(0.0), 0.0);
        assert!(t_osz_scalar(2.0) > 0.0);
        assert!(t_osz_scalar(-2.0) < 0.0);
        // identity up to the oscillation at |x| = 1
        assert!((t_osz_scalar(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [2, 3, 5, 10] {
            let q = random_orthogonal(d, &mut rng);
            let e = q.transpose() * &q - DMatrix::identity(d, d);
            assert!(e.amax() < 1e-12, "d = {d}: {}", e.amax());
        }
    }

    #[test]
    fn conditioning_spans_sqrt_alpha() {
        let c = conditioning(100.0, 3);
        assert_eq!(c[0], 1.0);
        assert!((c[2] - 10.0).abs() < 1e-12);
    }
}
