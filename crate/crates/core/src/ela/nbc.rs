//! Nearest-better clustering features.

use super::{defined, ElaError, FeatureVector};
use crate::design::ElaSample;
use crate::stats::{euclidean, mean, pearson, sd};

/// Per-point nearest-neighbour and nearest-better distances.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestBetter {
    pub d_nn: Vec<f64>,
    pub d_nb: Vec<f64>,
    /// Index of each point's nearest strictly better point; `None` for the
    /// points that have none.
    pub nb: Vec<Option<usize>>,
}

impl NearestBetter {
    /// How many points pick each point as their nearest better one.
    pub fn in_degree(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nb.len()];
        for j in self.nb.iter().flatten() {
            deg[*j] += 1;
        }
        deg
    }
}

/// Distances with "better" meaning strictly smaller `z`. Points without a
/// better point get the largest distance to any other point as `d_nb`.
/// Distance ties resolve to the lowest index.
pub fn nearest_better(x: &[Vec<f64>], z: &[f64]) -> NearestBetter {
    let n = x.len();
    let mut d_nn = vec![f64::INFINITY; n];
    let mut d_nb = vec![f64::INFINITY; n];
    let mut nb = vec![None; n];
    let mut d_far = vec![0.0f64; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = euclidean(&x[i], &x[j]);
            d_nn[i] = d_nn[i].min(d);
            d_far[i] = d_far[i].max(d);
            if z[j] < z[i] && d < d_nb[i] {
                d_nb[i] = d;
                nb[i] = Some(j);
            }
        }
    }
    for i in 0..n {
        if nb[i].is_none() {
            d_nb[i] = d_far[i];
        }
    }
    NearestBetter { d_nn, d_nb, nb }
}

pub fn features_nbc(sample: &ElaSample) -> Result<FeatureVector, ElaError> {
    let (x, z) = (sample.x(), sample.z());
    if x.len() < 3 {
        return Err(ElaError::InsufficientSample {
            set: "nbc",
            needed: 3,
            got: x.len(),
        });
    }
    if z.iter().all(|v| *v == z[0]) {
        return Err(ElaError::DegenerateFitness);
    }
    let nbd = nearest_better(x, z);
    if nbd.d_nn.contains(&0.0) {
        return Err(ElaError::DuplicatePoints);
    }
    let ratio: Vec<f64> = nbd.d_nn.iter().zip(&nbd.d_nb).map(|(a, b)| a / b).collect();
    let deg: Vec<f64> = nbd.in_degree().into_iter().map(|v| v as f64).collect();

    let mut out = FeatureVector::new();
    out.push(
        "nbc.nn_nb.sd_ratio",
        defined("nbc.nn_nb.sd_ratio", "constant nearest-better distances", sd(&nbd.d_nn) / sd(&nbd.d_nb))?,
    );
    out.push("nbc.nn_nb.mean_ratio", mean(&nbd.d_nn) / mean(&nbd.d_nb));
    out.push(
        "nbc.nn_nb.cor",
        pearson(&nbd.d_nn, &nbd.d_nb).ok_or(ElaError::Undefined {
            feature: "nbc.nn_nb.cor",
            reason: "zero variance",
        })?,
    );
    out.push("nbc.dist_ratio.coeff_var", sd(&ratio) / mean(&ratio));
    out.push(
        "nbc.nb_fitness.cor",
        pearson(&deg, z).ok_or(ElaError::Undefined {
            feature: "nbc.nb_fitness.cor",
            reason: "zero variance",
        })?,
    );
    Ok(out)
}
