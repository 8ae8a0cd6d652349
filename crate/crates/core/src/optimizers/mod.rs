//! Black-box minimizers working in the unit cube under a fixed evaluation
//! budget: random search, shuffled grid, CMA-ES, generalized simulated
//! annealing and GP-based model-based optimization.

pub mod cmaes;
pub mod gensa;
pub mod gp;
pub mod grid;
pub mod mbo;
mod trace;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{EvalError, Problem};

pub use cmaes::{CmaesParams, CmaesState};
pub use gensa::GensaParams;
pub use gp::expected_improvement;
pub use grid::make_grid;
pub use mbo::MboParams;
pub use trace::{Evaluation, Evaluator, Trace};

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("{optimizer} needs a budget of at least {min}, got {got}")]
    Budget {
        optimizer: &'static str,
        min: usize,
        got: usize,
    },
    #[error("invalid {optimizer} parameters: {reason}")]
    InvalidParams {
        optimizer: &'static str,
        reason: String,
    },
    #[error("evaluation {} failed: {source}", .trace.len() + 1)]
    Evaluation {
        source: EvalError,
        /// Everything evaluated before the failure.
        trace: Box<Trace>,
    },
}

/// Optimizer choice plus its settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum OptimizerSpec {
    Random,
    Grid,
    Cmaes(#[serde(default)] CmaesParams),
    Gensa(#[serde(default)] GensaParams),
    Mbo(#[serde(default)] MboParams),
}

impl OptimizerSpec {
    /// The five optimizers with default settings, in report order.
    pub fn roster() -> Vec<OptimizerSpec> {
        vec![
            OptimizerSpec::Cmaes(CmaesParams::default()),
            OptimizerSpec::Gensa(GensaParams::default()),
            OptimizerSpec::Grid,
            OptimizerSpec::Mbo(MboParams::default()),
            OptimizerSpec::Random,
        ]
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "random" => Some(Self::Random),
            "grid" => Some(Self::Grid),
            "cmaes" => Some(Self::Cmaes(CmaesParams::default())),
            "gensa" => Some(Self::Gensa(GensaParams::default())),
            "mbo" => Some(Self::Mbo(MboParams::default())),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::Grid => "grid",
            Self::Cmaes(_) => "cmaes",
            Self::Gensa(_) => "gensa",
            Self::Mbo(_) => "mbo",
        }
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        match self {
            Self::Random | Self::Grid => Ok(()),
            Self::Cmaes(p) => p.validate(),
            Self::Gensa(p) => p.validate(),
            Self::Mbo(p) => p.validate(),
        }
    }

    /// Smallest budget the variant accepts in dimension `d`.
    pub fn min_budget(&self, d: usize, budget: usize) -> usize {
        match self {
            Self::Random | Self::Grid | Self::Gensa(_) => 1,
            Self::Cmaes(p) => p.lambda(d),
            Self::Mbo(p) => p.initial_size(budget) + 1,
        }
    }
}

/// Runs `spec` on `problem` with exactly `budget` evaluations (the grid may
/// leave some unused). Deterministic in all arguments.
pub fn run<P: Problem + ?Sized>(
    spec: &OptimizerSpec,
    problem: &P,
    budget: usize,
    seed: u64,
) -> Result<Trace, OptimizerError> {
    spec.validate()?;
    let d = problem.dim();
    let min = spec.min_budget(d, budget);
    if budget < min {
        return Err(OptimizerError::Budget {
            optimizer: spec.name(),
            min,
            got: budget,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ev = Evaluator::new(problem, budget, Trace::new(problem.id(), spec.name(), seed));
    let outcome = match spec {
        OptimizerSpec::Random => random_search(&mut ev, &mut rng),
        OptimizerSpec::Grid => grid::run(&mut ev, &mut rng),
        OptimizerSpec::Cmaes(p) => cmaes::run(&mut ev, &mut rng, p),
        OptimizerSpec::Gensa(p) => gensa::run(&mut ev, &mut rng, p),
        OptimizerSpec::Mbo(p) => mbo::run(&mut ev, &mut rng, p),
    };
    match outcome {
        Ok(()) => Ok(ev.into_trace()),
        Err(source) => Err(OptimizerError::Evaluation {
            source,
            trace: Box::new(ev.into_trace()),
        }),
    }
}

fn random_search<P: Problem + ?Sized>(
    ev: &mut Evaluator<'_, P>,
    rng: &mut ChaCha8Rng,
) -> Result<(), EvalError> {
    let d = ev.dim();
    while ev.remaining() > 0 {
        let u: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        ev.eval(&u)?;
    }
    Ok(())
}

/// Proposes a point from `sample` until it lands in the unit cube, giving
/// up after 100 tries and clipping the last proposal.
pub(crate) fn sample_in_cube(mut sample: impl FnMut() -> Vec<f64>) -> Vec<f64> {
    let mut u = sample();
    for _ in 1..100 {
        if u.iter().all(|v| (0.0..=1.0).contains(v)) {
            return u;
        }
        u = sample();
    }
    u.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    u
}
