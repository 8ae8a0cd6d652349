//! The 24 noiseless BBOB functions with seeded instance transformations.
//!
//! Instances are materialized once by [`instantiate_bbob`] and are immutable
//! afterwards; evaluation is a pure function of the instance and the point.
//! Instance randomness comes from a ChaCha8 stream seeded with
//! `fid * 10^6 + iid * 10^3 + dim`, so the same `(fid, iid, dim)` always yields
//! bit-identical instances.

mod functions;
pub mod transforms;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::problem::{BoxDomain, EvalError, Problem};

pub const NUM_FUNCTIONS: u32 = 24;
/// Optimum location of the Schwefel function before sign flips.
const SCHWEFEL_XOPT: f64 = 4.2096874633 / 2.0;
/// Lunacek bi-Rastrigin first funnel centre.
pub(crate) const LUNACEK_MU0: f64 = 2.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BbobError {
    #[error("function id {0} outside 1..=24")]
    InvalidFunction(u32),
    #[error("instance id must be >= 1")]
    InvalidInstance,
    #[error("dimension {0} below the minimum of 2")]
    InvalidDimension(usize),
}

/// Multi-peak structure of the Gallagher functions (f21, f22).
#[derive(Debug, Clone, PartialEq)]
pub struct Peaks {
    pub weights: Vec<f64>,
    pub centers: Vec<Vec<f64>>,
    /// `R * center` for each peak.
    pub rotated_centers: Vec<Vec<f64>>,
    /// Diagonal of each peak's (rotated) quadratic form.
    pub scales: Vec<Vec<f64>>,
}

/// Per-instance transformation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    /// Orthogonal `R`.
    pub rotation: DMatrix<f64>,
    /// Orthogonal `Q`.
    pub rotation2: DMatrix<f64>,
    /// Random `+1/-1` vector.
    pub signs: Vec<f64>,
    pub peaks: Option<Peaks>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BbobInstance {
    fid: u32,
    iid: u32,
    dim: usize,
    xopt: Vec<f64>,
    fopt: f64,
    transform: Transform,
    id: String,
    domain: BoxDomain,
}

impl BbobInstance {
    pub fn fid(&self) -> u32 {
        self.fid
    }
    pub fn iid(&self) -> u32 {
        self.iid
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn xopt(&self) -> &[f64] {
        &self.xopt
    }
    pub fn fopt(&self) -> f64 {
        self.fopt
    }
    pub fn transform(&self) -> &Transform {
        &self.transform
    }
    /// `<fid>_<iid>_<dim>`.
    pub fn id(&self) -> &str {
        &self.id
    }
}

/// Seed of the instance generator.
pub fn instance_seed(fid: u32, iid: u32, dim: usize) -> u64 {
    fid as u64 * 1_000_000 + iid as u64 * 1_000 + dim as u64
}

pub fn instantiate_bbob(fid: u32, iid: u32, dim: usize) -> Result<BbobInstance, BbobError> {
    if !(1..=NUM_FUNCTIONS).contains(&fid) {
        return Err(BbobError::InvalidFunction(fid));
    }
    if iid < 1 {
        return Err(BbobError::InvalidInstance);
    }
    if dim < 2 {
        return Err(BbobError::InvalidDimension(dim));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(fid, iid, dim));
    let rotation = transforms::random_orthogonal(dim, &mut rng);
    let rotation2 = transforms::random_orthogonal(dim, &mut rng);
    let signs: Vec<f64> = (0..dim)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    let mut xopt: Vec<f64> = (0..dim).map(|_| rng.random_range(-4.0..4.0)).collect();
    let fopt = draw_fopt(&mut rng);

    let mut peaks = None;
    match fid {
        4 => {
            // the asymmetric x10 scaling acts on even (0-based) positive coordinates
            for v in xopt.iter_mut().step_by(2) {
                *v = v.abs();
            }
        }
        5 => xopt = signs.iter().map(|s| 5.0 * s).collect(),
        8 => xopt.iter_mut().for_each(|v| *v *= 0.75),
        9 | 19 => {
            let s = rosenbrock_scale(dim);
            xopt = transforms::mat_t_vec(&rotation, &vec![0.5 / s; dim]);
        }
        20 => xopt = signs.iter().map(|s| SCHWEFEL_XOPT * s).collect(),
        21 | 22 => {
            let p = gallagher_peaks(fid, dim, &rotation, &mut rng);
            xopt = p.centers[0].clone();
            peaks = Some(p);
        }
        24 => xopt = signs.iter().map(|s| 0.5 * LUNACEK_MU0 * s).collect(),
        _ => {}
    }

    Ok(BbobInstance {
        fid,
        iid,
        dim,
        xopt,
        fopt,
        transform: Transform {
            rotation,
            rotation2,
            signs,
            peaks,
        },
        id: format!("{fid}_{iid}_{dim}"),
        domain: BoxDomain::cube(dim, -5.0, 5.0).expect("dim >= 2"),
    })
}

/// Cauchy-distributed optimum value, rounded to two decimals and clipped.
fn draw_fopt<R: Rng>(rng: &mut R) -> f64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    let ratio = if b == 0.0 { 0.0 } else { a / b };
    ((10_000.0 * ratio).round() / 100.0).clamp(-1000.0, 1000.0)
}

pub(crate) fn rosenbrock_scale(dim: usize) -> f64 {
    1f64.max((dim as f64).sqrt() / 8.0)
}

fn gallagher_peaks<R: Rng>(fid: u32, dim: usize, rotation: &DMatrix<f64>, rng: &mut R) -> Peaks {
    let (n, first_alpha, spread, first_spread) = if fid == 21 {
        (101usize, 1000.0f64, 5.0, 4.0)
    } else {
        (21usize, 1000.0f64 * 1000.0, 4.9, 3.92)
    };
    let mut weights = Vec::with_capacity(n);
    weights.push(10.0);
    for i in 2..=n {
        weights.push(1.1 + 8.0 * (i - 2) as f64 / (n - 2) as f64);
    }
    // conditioning levels 1000^(2j/(n-2)), j = 0..n-2, assigned to peaks 2..n in random order
    let mut levels: Vec<f64> = (0..n - 1)
        .map(|j| 1000f64.powf(2.0 * j as f64 / (n - 2) as f64))
        .collect();
    shuffle(&mut levels, rng);
    let mut alphas = Vec::with_capacity(n);
    alphas.push(first_alpha);
    alphas.extend(levels);

    let denom = (dim - 1) as f64;
    let scales = alphas
        .iter()
        .map(|&alpha| {
            let mut diag: Vec<f64> = (0..dim)
                .map(|j| alpha.powf(0.5 * j as f64 / denom - 0.25))
                .collect();
            shuffle(&mut diag, rng);
            diag
        })
        .collect();
    let centers: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let r = if i == 0 { first_spread } else { spread };
            (0..dim).map(|_| rng.random_range(-r..r)).collect()
        })
        .collect();
    let rotated_centers = centers
        .iter()
        .map(|c| transforms::mat_vec(rotation, c))
        .collect();
    Peaks {
        weights,
        centers,
        rotated_centers,
        scales,
    }
}

fn shuffle<T, R: Rng>(v: &mut [T], rng: &mut R) {
    use rand::seq::SliceRandom;
    v.shuffle(rng);
}

pub fn evaluate_bbob(instance: &BbobInstance, x: &[f64]) -> Result<f64, EvalError> {
    if x.len() != instance.dim {
        return Err(EvalError::Dimension {
            expected: instance.dim,
            got: x.len(),
        });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite(i));
    }
    Ok(functions::raw(instance, x) + instance.fopt)
}

/// Cartesian product of the id lists, ordered fid-major, then iid, then dim.
pub fn bbob_suite(fids: &[u32], iids: &[u32], dims: &[usize]) -> Result<Vec<BbobInstance>, BbobError> {
    let mut out = Vec::with_capacity(fids.len() * iids.len() * dims.len());
    for &fid in fids {
        for &iid in iids {
            for &dim in dims {
                out.push(instantiate_bbob(fid, iid, dim)?);
            }
        }
    }
    Ok(out)
}

impl Problem for BbobInstance {
    fn id(&self) -> &str {
        &self.id
    }

    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError> {
        evaluate_bbob(self, x)
    }
}
