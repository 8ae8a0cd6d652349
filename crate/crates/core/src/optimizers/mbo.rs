//! Sequential model-based optimization with a GP surrogate and expected
//! improvement.

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::gp::{expected_improvement, GpFit};
use super::{Evaluator, OptimizerError};
use crate::design::lhs_minmax;
use crate::problem::{EvalError, Problem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MboParams {
    /// Share of the budget spent on the initial Latin hypercube.
    pub initial_fraction: f64,
    pub design_restarts: usize,
    pub candidates_per_dim: usize,
    pub local_steps: usize,
    pub local_step_size: f64,
    pub nugget: f64,
    pub max_nugget: f64,
    /// Likelihood evaluations for the first fit and for each warm-started
    /// refit.
    pub hyper_evals_initial: usize,
    pub hyper_evals: usize,
}

impl Default for MboParams {
    fn default() -> Self {
        Self {
            initial_fraction: 0.08,
            design_restarts: 20,
            candidates_per_dim: 1000,
            local_steps: 50,
            local_step_size: 0.05,
            nugget: 1e-8,
            max_nugget: 1e-2,
            hyper_evals_initial: 60,
            hyper_evals: 10,
        }
    }
}

impl MboParams {
    pub fn initial_size(&self, budget: usize) -> usize {
        ((self.initial_fraction * budget as f64 - 1e-9).ceil() as usize).max(2)
    }

    pub(crate) fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |reason: &str| OptimizerError::InvalidParams {
            optimizer: "mbo",
            reason: reason.to_owned(),
        };
        if !(self.initial_fraction > 0.0 && self.initial_fraction < 1.0) {
            return Err(bad("initial_fraction must lie in (0, 1)"));
        }
        if self.candidates_per_dim == 0 || self.design_restarts == 0 {
            return Err(bad("candidate and restart counts must be positive"));
        }
        if !(self.nugget > 0.0 && self.nugget <= self.max_nugget) {
            return Err(bad("nugget must be positive and at most max_nugget"));
        }
        if !(self.local_step_size > 0.0) {
            return Err(bad("local_step_size must be positive"));
        }
        Ok(())
    }
}

/// Fits the surrogate, raising the nugget tenfold after each failure.
/// Returns `None` if even the largest nugget fails.
pub fn fit_surrogate(
    x: &[Vec<f64>],
    y: &[f64],
    start: &[f64],
    step: f64,
    max_evals: usize,
    params: &MboParams,
) -> Option<GpFit> {
    let mut nugget = params.nugget;
    loop {
        if let Some(fit) = GpFit::optimize(x, y, start, step, nugget, max_evals) {
            return Some(fit);
        }
        nugget *= 10.0;
        if nugget > params.max_nugget * (1.0 + 1e-9) {
            return None;
        }
    }
}

/// Improvements below this many standard deviations of the observed values
/// are treated as none at all.
pub const EI_FLOOR: f64 = 1e-12;

/// What a proposal was chosen for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Proposal {
    ExpectedImprovement,
    /// Expected improvement vanished everywhere; the lowest predicted mean
    /// was taken instead.
    LowestMean,
}

/// Maximizes expected improvement over random candidates, then refines the
/// winner by accepted-if-better Gaussian perturbations.
pub fn propose(
    fit: &GpFit,
    best: f64,
    d: usize,
    params: &MboParams,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, Proposal) {
    let n_cand = params.candidates_per_dim * d;
    let cands: Vec<Vec<f64>> = (0..n_cand)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    // an upper bound on each candidate's EI lets most of them skip the
    // exact variance computation
    let mut buf = Vec::new();
    let mut means = Vec::with_capacity(n_cand);
    let mut bounds = Vec::with_capacity(n_cand);
    for c in &cands {
        let (m, s) = fit.predict_bound_with(c, &mut buf);
        means.push(m);
        bounds.push(expected_improvement(m, s, best));
    }
    let mut order: Vec<usize> = (0..n_cand).collect();
    order.sort_by(|a, b| bounds[*b].total_cmp(&bounds[*a]).then(a.cmp(b)));
    let mut top = order[0];
    let mut top_ei = f64::NEG_INFINITY;
    for &i in &order {
        if bounds[i] <= top_ei.max(EI_FLOOR) {
            break;
        }
        let (m, s) = fit.predict(&cands[i]);
        let ei = expected_improvement(m, s, best);
        if ei > top_ei {
            top_ei = ei;
            top = i;
        }
    }

    let step = Normal::new(0.0, params.local_step_size).expect("positive step size");
    let perturb = |x: &[f64], rng: &mut ChaCha8Rng| -> Vec<f64> {
        x.iter().map(|v| (v + step.sample(rng)).clamp(0.0, 1.0)).collect()
    };
    if top_ei > EI_FLOOR {
        let mut x = cands[top].clone();
        for _ in 0..params.local_steps {
            let cand = perturb(&x, rng);
            let (m, s) = fit.predict(&cand);
            let ei = expected_improvement(m, s, best);
            if ei > top_ei {
                top_ei = ei;
                x = cand;
            }
        }
        (x, Proposal::ExpectedImprovement)
    } else {
        let low = (0..n_cand)
            .min_by(|a, b| means[*a].total_cmp(&means[*b]).then(a.cmp(b)))
            .unwrap_or(0);
        let mut x = cands[low].clone();
        let mut low_mean = means[low];
        for _ in 0..params.local_steps {
            let cand = perturb(&x, rng);
            let m = fit.predict(&cand).0;
            if m < low_mean {
                low_mean = m;
                x = cand;
            }
        }
        (x, Proposal::LowestMean)
    }
}

pub(super) fn run<P: Problem + ?Sized>(
    ev: &mut Evaluator<'_, P>,
    rng: &mut ChaCha8Rng,
    params: &MboParams,
) -> Result<(), EvalError> {
    let d = ev.dim();
    let n0 = params.initial_size(ev.remaining());
    let design = lhs_minmax(n0, d, rng.next_u64(), params.design_restarts)
        .expect("initial design size and dimension are positive");
    for p in &design {
        ev.eval(p)?;
    }
    let mut log_ls = vec![0.3f64.ln(); d];
    let mut first = true;
    let mut max_nugget = params.nugget;
    let mut fallbacks = 0usize;
    let mut mean_proposals = 0usize;
    while ev.remaining() > 0 {
        let x: Vec<Vec<f64>> = ev.trace.evals.iter().map(|e| e.x.clone()).collect();
        let raw: Vec<f64> = ev.trace.evals.iter().map(|e| e.y).collect();
        let m = crate::stats::mean(&raw);
        let s = crate::stats::sd(&raw);
        let s = if s > 0.0 && s.is_finite() { s } else { 1.0 };
        let y: Vec<f64> = raw.iter().map(|v| (v - m) / s).collect();
        let best = y.iter().copied().fold(f64::INFINITY, f64::min);

        let (step, evals) = if first {
            (1.0, params.hyper_evals_initial)
        } else {
            (0.3, params.hyper_evals)
        };
        let next = match fit_surrogate(&x, &y, &log_ls, step, evals, params) {
            Some(fit) => {
                first = false;
                max_nugget = max_nugget.max(fit.nugget);
                log_ls = fit.log_ls.clone();
                let (next, kind) = propose(&fit, best, d, params, rng);
                if kind == Proposal::LowestMean {
                    mean_proposals += 1;
                }
                next
            }
            None => {
                fallbacks += 1;
                (0..d).map(|_| rng.random::<f64>()).collect()
            }
        };
        ev.eval(&next)?;
    }
    if max_nugget > params.nugget {
        ev.trace.metadata.insert("mbo_max_nugget".into(), max_nugget.to_string());
    }
    if mean_proposals > 0 {
        ev.trace.metadata.insert("mbo_mean_proposals".into(), mean_proposals.to_string());
    }
    if fallbacks > 0 {
        ev.trace.metadata.insert("mbo_random_fallbacks".into(), fallbacks.to_string());
    }
    Ok(())
}
