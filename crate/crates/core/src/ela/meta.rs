//! Linear and quadratic meta-model fits.

use nalgebra::{DMatrix, DVector};

use super::{defined, ElaError, FeatureVector};
use crate::design::ElaSample;

/// Squared-term coefficients at or below this size (on standardized
/// objective values over the unit cube) are rounding noise.
pub const CURVATURE_NOISE: f64 = 1e-10;

struct Fit {
    coef: Vec<f64>,
    adj_r2: f64,
}

#[derive(Clone, Copy)]
enum Terms {
    Linear,
    LinearInteract,
    Quadratic,
    QuadraticInteract,
}

fn row_terms(x: &[f64], terms: Terms) -> Vec<f64> {
    let d = x.len();
    let mut r = Vec::with_capacity(1 + 2 * d + d * (d - 1) / 2);
    r.push(1.0);
    r.extend_from_slice(x);
    if matches!(terms, Terms::Quadratic | Terms::QuadraticInteract) {
        r.extend(x.iter().map(|v| v * v));
    }
    if matches!(terms, Terms::LinearInteract | Terms::QuadraticInteract) {
        for i in 0..d {
            for j in i + 1..d {
                r.push(x[i] * x[j]);
            }
        }
    }
    r
}

fn fit(sample: &ElaSample, terms: Terms, model: &'static str) -> Result<Fit, ElaError> {
    let rows: Vec<Vec<f64>> = sample.x().iter().map(|x| row_terms(x, terms)).collect();
    let n = rows.len();
    let k = rows[0].len();
    if n <= k {
        return Err(ElaError::InsufficientSample {
            set: "ela_meta",
            needed: k + 1,
            got: n,
        });
    }
    let a = DMatrix::from_fn(n, k, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(sample.z());
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax) {
        return Err(ElaError::SingularFit { model });
    }
    let coef = svd
        .solve(&b, 0.0)
        .map_err(|_| ElaError::SingularFit { model })?;
    let resid = &b - &a * &coef;
    let ss_res = resid.norm_squared();
    let mean = b.mean();
    let ss_tot: f64 = b.iter().map(|v| (v - mean) * (v - mean)).sum();
    if !(ss_tot > 0.0) {
        return Err(ElaError::DegenerateFitness);
    }
    let r2 = 1.0 - ss_res / ss_tot;
    let p = (k - 1) as f64;
    let nf = n as f64;
    let adj_r2 = 1.0 - (1.0 - r2) * (nf - 1.0) / (nf - p - 1.0);
    Ok(Fit {
        coef: coef.iter().copied().collect(),
        adj_r2,
    })
}

/// Adjusted R² of four least-squares models, the linear model's intercept
/// and absolute-slope extrema, and the curvature ratio of the pure quadratic
/// model.
pub fn features_ela_meta(sample: &ElaSample) -> Result<FeatureVector, ElaError> {
    let d = sample.dim();
    let lin = fit(sample, Terms::Linear, "lin_simple")?;
    let lin_i = fit(sample, Terms::LinearInteract, "lin_w_interact")?;
    let quad = fit(sample, Terms::Quadratic, "quad_simple")?;
    let quad_i = fit(sample, Terms::QuadraticInteract, "quad_w_interact")?;

    let slopes: Vec<f64> = lin.coef[1..].iter().map(|c| c.abs()).collect();
    let cmin = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let cmax = slopes.iter().copied().fold(0.0, f64::max);
    let curv: Vec<f64> = quad.coef[1 + d..1 + 2 * d].iter().map(|c| c.abs()).collect();
    let qmin = curv.iter().copied().fold(f64::INFINITY, f64::min);
    let qmax = curv.iter().copied().fold(0.0, f64::max);

    let mut out = FeatureVector::new();
    out.push("ela_meta.lin_simple.adj_r2", lin.adj_r2);
    out.push("ela_meta.lin_simple.intercept", lin.coef[0]);
    out.push("ela_meta.lin_simple.coef.min", cmin);
    out.push("ela_meta.lin_simple.coef.max", cmax);
    out.push(
        "ela_meta.lin_simple.coef.max_by_min",
        defined("ela_meta.lin_simple.coef.max_by_min", "zero slope", cmax / cmin)?,
    );
    out.push("ela_meta.lin_w_interact.adj_r2", lin_i.adj_r2);
    out.push("ela_meta.quad_simple.adj_r2", quad.adj_r2);
    // A fit with no curvature above noise in any direction is isotropic.
    let cond = if qmax <= CURVATURE_NOISE { 1.0 } else { qmax / qmin };
    out.push(
        "ela_meta.quad_simple.cond",
        defined("ela_meta.quad_simple.cond", "zero curvature", cond)?,
    );
    out.push("ela_meta.quad_w_interact.adj_r2", quad_i.adj_r2);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{lhs_minmax, standardize_y};

    fn sample(d: usize, n: usize, f: impl Fn(&[f64]) -> f64) -> ElaSample {
        let x = lhs_minmax(n, d, 5, 10).unwrap();
        let y: Vec<f64> = x.iter().map(|r| f(r)).collect();
        ElaSample::new(x, standardize_y(&y).unwrap()).unwrap()
    }

    #[test]
    fn exact_linear_model() {
        let s = sample(3, 60, |x| 2.0 * x[0] - x[1] + 0.5 * x[2] + 1.0);
        let f = features_ela_meta(&s).unwrap();
        assert!((f.get("ela_meta.lin_simple.adj_r2").unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equal_curvature_quadratic() {
        let s = sample(2, 40, |x| (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2));
        let f = features_ela_meta(&s).unwrap();
        assert!((f.get("ela_meta.quad_simple.adj_r2").unwrap() - 1.0).abs() < 1e-9);
        assert!((f.get("ela_meta.quad_simple.cond").unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn curvature_ratio_four() {
        let s = sample(2, 40, |x| 4.0 * (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2));
        let f = features_ela_meta(&s).unwrap();
        assert!((f.get("ela_meta.quad_simple.cond").unwrap() - 4.0).abs() < 1e-6);
    }

    #[test]
    fn linear_function_has_unit_condition() {
        let s = sample(2, 100, |x| 3.0 * x[0] - 2.0 * x[1]);
        let f = features_ela_meta(&s).unwrap();
        assert_eq!(f.get("ela_meta.quad_simple.cond"), Some(1.0));
    }

    #[test]
    fn too_few_points_for_interactions() {
        // 5D full quadratic has 21 coefficients
        let s = sample(5, 20, |x| x.iter().sum());
        assert!(matches!(
            features_ela_meta(&s),
            Err(ElaError::InsufficientSample { .. })
        ));
    }

    #[test]
    fn repeated_points_are_singular() {
        let x = vec![vec![0.1, 0.1]; 12];
        let z: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let s = ElaSample::new(x, z).unwrap();
        assert!(matches!(
            features_ela_meta(&s),
            Err(ElaError::SingularFit { .. })
        ));
    }
}
