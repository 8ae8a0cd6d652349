//! Dispersion of the best points relative to the whole sample.

use super::{pairwise_distances, ElaError, FeatureVector};
use crate::design::ElaSample;
use crate::stats::{mean, median};

pub const DEFAULT_QUANTILES: [f64; 4] = [0.02, 0.05, 0.10, 0.25];

/// Number of points in the best-`q` subset of an `n`-point sample.
pub fn subset_size(q: f64, n: usize) -> usize {
    // guards against products like 0.1 * 250 landing just above an integer
    ((q * n as f64) - 1e-9).ceil().max(0.0) as usize
}

fn label(q: f64) -> String {
    format!("{:02}", (q * 100.0).round() as u64)
}

pub fn features_disp(sample: &ElaSample) -> Result<FeatureVector, ElaError> {
    features_disp_with(sample, &DEFAULT_QUANTILES)
}

/// Dispersion features for arbitrary quantiles. The best points are taken
/// by a stable sort on `z`, so value ties keep sample order.
pub fn features_disp_with(sample: &ElaSample, quantiles: &[f64]) -> Result<FeatureVector, ElaError> {
    let n = sample.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| sample.z()[*a].total_cmp(&sample.z()[*b]));

    let sizes: Vec<usize> = quantiles.iter().map(|q| subset_size(*q, n)).collect();
    if let Some(&k) = sizes.iter().find(|k| **k < 2) {
        let q = quantiles[sizes.iter().position(|s| *s == k).unwrap()];
        return Err(ElaError::InsufficientSample {
            set: "disp",
            needed: (2.0 / q).ceil() as usize,
            got: n,
        });
    }

    let full = pairwise_distances(sample.x());
    let full_mean = mean(&full);
    let full_median = median(&full);

    let mut stats = Vec::with_capacity(quantiles.len());
    for &k in &sizes {
        let subset: Vec<Vec<f64>> = order[..k].iter().map(|i| sample.x()[*i].clone()).collect();
        let dist = pairwise_distances(&subset);
        stats.push((mean(&dist), median(&dist)));
    }

    let mut out = FeatureVector::new();
    for (q, (m, _)) in quantiles.iter().zip(&stats) {
        out.push(format!("disp.ratio_mean_{}", label(*q)), m / full_mean);
    }
    for (q, (_, md)) in quantiles.iter().zip(&stats) {
        out.push(format!("disp.ratio_median_{}", label(*q)), md / full_median);
    }
    for (q, (m, _)) in quantiles.iter().zip(&stats) {
        out.push(format!("disp.diff_mean_{}", label(*q)), m - full_mean);
    }
    for (q, (_, md)) in quantiles.iter().zip(&stats) {
        out.push(format!("disp.diff_median_{}", label(*q)), md - full_median);
    }
    Ok(out)
}
