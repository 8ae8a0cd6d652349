//! Generalized simulated annealing with a Tsallis–Stariolo visiting
//! distribution and no local-search phase.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::{Evaluator, OptimizerError};
use crate::problem::{EvalError, Problem};

const TAIL_LIMIT: f64 = 1e8;
const MIN_VISIT_BOUND: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GensaParams {
    pub initial_temp: f64,
    pub visit: f64,
    pub accept: f64,
    /// Reanneal once the temperature falls below this fraction of the
    /// initial temperature.
    pub restart_temp_ratio: f64,
}

impl Default for GensaParams {
    fn default() -> Self {
        Self {
            initial_temp: 5230.0,
            visit: 2.62,
            accept: -5.0,
            restart_temp_ratio: 2e-5,
        }
    }
}

impl GensaParams {
    pub(crate) fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |reason: &str| OptimizerError::InvalidParams {
            optimizer: "gensa",
            reason: reason.to_owned(),
        };
        if !(self.visit > 1.0 && self.visit < 3.0) {
            return Err(bad("visiting parameter must lie in (1, 3)"));
        }
        if !(self.accept < 1.0) {
            return Err(bad("acceptance parameter must be below 1"));
        }
        if !(self.initial_temp > 0.0) {
            return Err(bad("initial temperature must be positive"));
        }
        if !(self.restart_temp_ratio > 0.0 && self.restart_temp_ratio < 1.0) {
            return Err(bad("restart ratio must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Visiting temperature after `t` annealing steps (t = 0 gives the
    /// initial temperature).
    pub fn temperature(&self, t: usize) -> f64 {
        let q = self.visit - 1.0;
        let t1 = 2f64.powf(q) - 1.0;
        let t2 = (t as f64 + 2.0).powf(q) - 1.0;
        self.initial_temp * t1 / t2
    }
}

/// Generalized Metropolis acceptance probability of an uphill move of size
/// `delta` at acceptance temperature `temp`.
pub fn acceptance_probability(delta: f64, temp: f64, accept: f64) -> f64 {
    let base = 1.0 - (1.0 - accept) * delta / temp;
    if base <= 0.0 {
        0.0
    } else {
        (base.ln() / (1.0 - accept)).exp().min(1.0)
    }
}

/// Samples from the distorted Cauchy–Lorentz visiting distribution.
struct Visitor {
    qv: f64,
    factor4_p: f64,
    factor6: f64,
}

impl Visitor {
    fn new(qv: f64) -> Self {
        let factor2 = ((4.0 - qv) * (qv - 1.0).ln()).exp();
        let factor3 = ((2.0 - qv) * 2f64.ln() / (qv - 1.0)).exp();
        let factor4_p = PI.sqrt() * factor2 / (factor3 * (3.0 - qv));
        let factor5 = 1.0 / (qv - 1.0) - 0.5;
        let d1 = 2.0 - factor5;
        let factor6 = PI * (1.0 - factor5) / (PI * (1.0 - factor5)).sin() / ln_gamma(d1).exp();
        Self {
            qv,
            factor4_p,
            factor6,
        }
    }

    fn draw(&self, temp: f64, rng: &mut ChaCha8Rng) -> f64 {
        let x: f64 = StandardNormal.sample(rng);
        let y: f64 = StandardNormal.sample(rng);
        let factor1 = (temp.ln() / (self.qv - 1.0)).exp();
        let factor4 = self.factor4_p * factor1;
        let sigmax = (-(self.qv - 1.0) * (self.factor6 / factor4).ln() / (3.0 - self.qv)).exp();
        let den = ((self.qv - 1.0) * y.abs().ln() / (3.0 - self.qv)).exp();
        let v = x * sigmax / den;
        if v > TAIL_LIMIT {
            TAIL_LIMIT * rng.random::<f64>()
        } else if v < -TAIL_LIMIT {
            -TAIL_LIMIT * rng.random::<f64>()
        } else if v.is_nan() {
            0.0
        } else {
            v
        }
    }
}

/// Wraps a coordinate back into `[0, 1)` periodically.
fn wrap(v: f64) -> f64 {
    let w = v.rem_euclid(1.0);
    if w < MIN_VISIT_BOUND {
        w + MIN_VISIT_BOUND
    } else {
        w
    }
}

pub(super) fn run<P: Problem + ?Sized>(
    ev: &mut Evaluator<'_, P>,
    rng: &mut ChaCha8Rng,
    params: &GensaParams,
) -> Result<(), EvalError> {
    let d = ev.dim();
    let visitor = Visitor::new(params.visit);
    let restart_temp = params.initial_temp * params.restart_temp_ratio;
    let mut reanneals = 0usize;

    'anneal: while ev.remaining() > 0 {
        let mut x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let mut e = ev.eval(&x)?;
        let mut t = 0usize;
        while ev.remaining() > 0 {
            let temp = params.temperature(t);
            if temp < restart_temp {
                reanneals += 1;
                continue 'anneal;
            }
            let temp_step = temp / (t as f64 + 1.0);
            for j in 0..2 * d {
                if ev.remaining() == 0 {
                    break 'anneal;
                }
                let mut cand = x.clone();
                if j < d {
                    for c in cand.iter_mut() {
                        *c = wrap(*c + visitor.draw(temp, rng));
                    }
                } else {
                    let k = j - d;
                    cand[k] = wrap(cand[k] + visitor.draw(temp, rng));
                }
                let ec = ev.eval(&cand)?;
                if ec < e {
                    x = cand;
                    e = ec;
                } else {
                    let r: f64 = rng.random();
                    if r <= acceptance_probability(ec - e, temp_step, params.accept) {
                        x = cand;
                        e = ec;
                    }
                }
            }
            t += 1;
        }
    }
    if reanneals > 0 {
        ev.trace.metadata.insert("gensa_reanneals".into(), reanneals.to_string());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn temperature_schedule() {
        let p = GensaParams::default();
        assert!((p.temperature(0) - 5230.0).abs() < 1e-9);
        let q = 1.62f64;
        let expected = 5230.0 * (2f64.powf(q) - 1.0) / (11f64.powf(q) - 1.0);
        assert!((p.temperature(9) - expected).abs() < 1e-9);
        assert!(p.temperature(10) < p.temperature(9));
    }

    #[test]
    fn downhill_limit_and_cold_limit() {
        assert_eq!(acceptance_probability(0.0, 1.0, -5.0), 1.0);
        for temp in [1e-3, 1e-9, 1e-300] {
            assert_eq!(acceptance_probability(1e-2, temp, -5.0), 0.0);
        }
        let p = acceptance_probability(0.1, 1.0, -5.0);
        assert!((p - (1.0f64 - 0.6).powf(1.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn visits_are_finite_and_wrapped() {
        let v = Visitor::new(2.62);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for temp in [5230.0, 1.0, 1e-3] {
            for _ in 0..1000 {
                let s = v.draw(temp, &mut rng);
                assert!(s.is_finite() && s.abs() <= TAIL_LIMIT);
                let w = wrap(0.5 + s);
                assert!((0.0..1.0).contains(&w));
            }
        }
    }

    #[test]
    fn cooler_visits_are_shorter() {
        let v = Visitor::new(2.62);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let med = |temp: f64, rng: &mut ChaCha8Rng| {
            let mut s: Vec<f64> = (0..2001).map(|_| v.draw(temp, rng).abs()).collect();
            s.sort_by(f64::total_cmp);
            s[1000]
        };
        assert!(med(1.0, &mut rng) < med(5230.0, &mut rng));
    }
}
