//! (μ/μ_w, λ)-CMA-ES without restarts.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{sample_in_cube, Evaluator, OptimizerError};
use crate::problem::{EvalError, Problem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CmaesParams {
    pub sigma0: f64,
    /// Population size; `None` uses `4 + floor(3 ln d)`.
    pub lambda: Option<usize>,
}

impl Default for CmaesParams {
    fn default() -> Self {
        Self {
            sigma0: 0.5,
            lambda: None,
        }
    }
}

impl CmaesParams {
    pub fn lambda(&self, d: usize) -> usize {
        self.lambda
            .unwrap_or(4 + (3.0 * (d as f64).ln()).floor() as usize)
    }

    pub(crate) fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |reason: &str| OptimizerError::InvalidParams {
            optimizer: "cmaes",
            reason: reason.to_owned(),
        };
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(bad("sigma0 must be positive"));
        }
        if self.lambda.is_some_and(|l| l < 2) {
            return Err(bad("lambda must be at least 2"));
        }
        Ok(())
    }
}

/// Strategy state between generations.
#[derive(Debug, Clone)]
pub struct CmaesState {
    pub mean: DVector<f64>,
    pub sigma: f64,
    pub cov: DMatrix<f64>,
    pub generation: usize,
    lambda: usize,
    weights: Vec<f64>,
    mu_eff: f64,
    cc: f64,
    cs: f64,
    c1: f64,
    cmu: f64,
    damps: f64,
    chi_n: f64,
    pc: DVector<f64>,
    ps: DVector<f64>,
    basis: DMatrix<f64>,
    axis: DVector<f64>,
}

impl CmaesState {
    /// Fresh state centred in the unit cube.
    pub fn new(d: usize, params: &CmaesParams) -> Self {
        let n = d as f64;
        let lambda = params.lambda(d);
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu)
            .map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - (i as f64).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let cc = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let cs = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let c1 = 2.0 / ((n + 1.3).powi(2) + mu_eff);
        let cmu = (1.0 - c1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff));
        let damps = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + cs;
        Self {
            mean: DVector::from_element(d, 0.5),
            sigma: params.sigma0,
            cov: DMatrix::identity(d, d),
            generation: 0,
            lambda,
            weights,
            mu_eff,
            cc,
            cs,
            c1,
            cmu,
            damps,
            chi_n: n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n)),
            pc: DVector::zeros(d),
            ps: DVector::zeros(d),
            basis: DMatrix::identity(d, d),
            axis: DVector::from_element(d, 1.0),
        }
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    /// Draws one generation inside the unit cube.
    pub fn ask(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        let d = self.mean.len();
        (0..self.lambda)
            .map(|_| {
                sample_in_cube(|| {
                    let z = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
                    let y = &self.basis * z.component_mul(&self.axis);
                    (&self.mean + self.sigma * y).iter().copied().collect()
                })
            })
            .collect()
    }

    /// Updates mean, paths, covariance and step size from a ranked
    /// generation. `points` may be shorter than λ only when the budget ran
    /// out, in which case the caller should not tell at all.
    pub fn tell(&mut self, points: &[Vec<f64>], values: &[f64]) {
        let d = self.mean.len();
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
        let old = self.mean.clone();
        let steps: Vec<DVector<f64>> = order[..self.weights.len()]
            .iter()
            .map(|i| (DVector::from_column_slice(&points[*i]) - &old) / self.sigma)
            .collect();
        let mut yw = DVector::zeros(d);
        for (w, y) in self.weights.iter().zip(&steps) {
            yw += *w * y;
        }
        let mean = &old + self.sigma * &yw;

        let inv_sqrt = &self.basis
            * DMatrix::from_diagonal(&self.axis.map(|a| 1.0 / a))
            * self.basis.transpose();
        let ps = (1.0 - self.cs) * &self.ps
            + (self.cs * (2.0 - self.cs) * self.mu_eff).sqrt() * (inv_sqrt * &yw);
        let gen = (self.generation + 1) as f64;
        let ps_norm = ps.norm();
        let hsig = ps_norm / (1.0 - (1.0 - self.cs).powf(2.0 * gen)).sqrt() / self.chi_n
            < 1.4 + 2.0 / (d as f64 + 1.0);
        let h = if hsig { 1.0 } else { 0.0 };
        let pc = (1.0 - self.cc) * &self.pc
            + h * (self.cc * (2.0 - self.cc) * self.mu_eff).sqrt() * &yw;
        let mut rank_mu = DMatrix::zeros(d, d);
        for (w, y) in self.weights.iter().zip(&steps) {
            rank_mu += *w * y * y.transpose();
        }
        let decay = 1.0 - self.c1 - self.cmu + (1.0 - h) * self.c1 * self.cc * (2.0 - self.cc);
        let mut cov = decay * &self.cov + self.c1 * &pc * pc.transpose() + self.cmu * rank_mu;
        cov = (&cov + cov.transpose()) * 0.5;
        let sigma = self.sigma * ((self.cs / self.damps) * (ps_norm / self.chi_n - 1.0)).exp();

        let eig = SymmetricEigen::new(cov.clone());
        let finite = cov.iter().all(|v| v.is_finite()) && sigma.is_finite() && sigma > 0.0;
        self.generation += 1;
        if !finite || eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            // numerical breakdown: keep the previous distribution
            return;
        }
        self.mean = mean;
        self.ps = ps;
        self.pc = pc;
        self.cov = cov;
        self.sigma = sigma;
        self.basis = eig.eigenvectors;
        self.axis = eig.eigenvalues.map(|v| v.max(1e-300).sqrt());
    }
}

pub(super) fn run<P: Problem + ?Sized>(
    ev: &mut Evaluator<'_, P>,
    rng: &mut ChaCha8Rng,
    params: &CmaesParams,
) -> Result<(), EvalError> {
    let mut state = CmaesState::new(ev.dim(), params);
    while ev.remaining() > 0 {
        let points = state.ask(rng);
        if ev.remaining() < points.len() {
            for p in &points[..ev.remaining()] {
                ev.eval(p)?;
            }
            break;
        }
        let mut values = Vec::with_capacity(points.len());
        for p in &points {
            values.push(ev.eval(p)?);
        }
        state.tell(&points, &values);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn default_population_sizes() {
        let p = CmaesParams::default();
        assert_eq!(p.lambda(2), 6);
        assert_eq!(p.lambda(5), 8);
        assert_eq!(p.lambda(3), 7);
    }

    #[test]
    fn converges_on_a_quadratic() {
        let mut state = CmaesState::new(3, &CmaesParams::default());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = |x: &[f64]| x.iter().map(|v| (v - 0.3).powi(2)).sum::<f64>();
        for _ in 0..150 {
            let pts = state.ask(&mut rng);
            let vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
            state.tell(&pts, &vals);
        }
        assert!(f(state.mean.as_slice()) < 1e-12);
    }

    #[test]
    fn samples_stay_in_the_cube() {
        let mut state = CmaesState::new(2, &CmaesParams { sigma0: 5.0, lambda: None });
        state.mean = DVector::from_vec(vec![0.99, 0.01]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in state.ask(&mut rng) {
            assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
