//! Exploratory landscape analysis features on an [`ElaSample`].
//!
//! Five feature sets with 38 features in a fixed catalog order:
//! `ela_meta` (9), `ela_distr` (3), `nbc` (5), `disp` (16) and `ic` (5).
//! Degenerate inputs are reported as [`ElaError`]s instead of NaN values.

pub mod disp;
pub mod distr;
pub mod ic;
pub mod meta;
pub mod nbc;

use thiserror::Error;

use crate::design::ElaSample;

pub use disp::{features_disp, features_disp_with, DEFAULT_QUANTILES};
pub use distr::features_ela_distr;
pub use ic::features_ic;
pub use meta::features_ela_meta;
pub use nbc::features_nbc;

pub const CATALOG: [&str; 38] = [
    "ela_meta.lin_simple.adj_r2",
    "ela_meta.lin_simple.intercept",
    "ela_meta.lin_simple.coef.min",
    "ela_meta.lin_simple.coef.max",
    "ela_meta.lin_simple.coef.max_by_min",
    "ela_meta.lin_w_interact.adj_r2",
    "ela_meta.quad_simple.adj_r2",
    "ela_meta.quad_simple.cond",
    "ela_meta.quad_w_interact.adj_r2",
    "ela_distr.skewness",
    "ela_distr.kurtosis",
    "ela_distr.number_of_peaks",
    "nbc.nn_nb.sd_ratio",
    "nbc.nn_nb.mean_ratio",
    "nbc.nn_nb.cor",
    "nbc.dist_ratio.coeff_var",
    "nbc.nb_fitness.cor",
    "disp.ratio_mean_02",
    "disp.ratio_mean_05",
    "disp.ratio_mean_10",
    "disp.ratio_mean_25",
    "disp.ratio_median_02",
    "disp.ratio_median_05",
    "disp.ratio_median_10",
    "disp.ratio_median_25",
    "disp.diff_mean_02",
    "disp.diff_mean_05",
    "disp.diff_mean_10",
    "disp.diff_mean_25",
    "disp.diff_median_02",
    "disp.diff_median_05",
    "disp.diff_median_10",
    "disp.diff_median_25",
    "ic.h.max",
    "ic.eps.s",
    "ic.eps.max",
    "ic.eps.ratio",
    "ic.m0",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElaError {
    #[error("{set}: needs at least {needed} points, got {got}")]
    InsufficientSample {
        set: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("{model}: design matrix is rank deficient")]
    SingularFit { model: &'static str },
    #[error("degenerate fitness: all objective values are equal")]
    DegenerateFitness,
    #[error("degenerate step: consecutive tour points {0} and {1} coincide")]
    DegenerateStep(usize, usize),
    #[error("sample contains duplicate points")]
    DuplicatePoints,
    #[error("{feature} is undefined on this sample ({reason})")]
    Undefined {
        feature: &'static str,
        reason: &'static str,
    },
}

/// Feature name/value pairs in insertion (catalog) order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    entries: Vec<(String, f64)>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn push(&mut self, name: impl Into<String>, value: f64) {
        debug_assert!(value.is_finite());
        self.entries.push((name.into(), value));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|e| e.1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(n, v)| (n.as_str(), *v))
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.1).collect()
    }

    pub fn extend(&mut self, other: FeatureVector) {
        self.entries.extend(other.entries);
    }
}

/// All five feature sets, in catalog order.
pub fn compute_all(sample: &ElaSample) -> Result<FeatureVector, ElaError> {
    let mut out = features_ela_meta(sample)?;
    out.extend(features_ela_distr(sample)?);
    out.extend(features_nbc(sample)?);
    out.extend(features_disp(sample)?);
    out.extend(features_ic(sample)?);
    debug_assert_eq!(out.names(), CATALOG);
    Ok(out)
}

pub(crate) fn defined(feature: &'static str, reason: &'static str, v: f64) -> Result<f64, ElaError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ElaError::Undefined { feature, reason })
    }
}

/// All pairwise Euclidean distances `i < j`, row-major.
pub(crate) fn pairwise_distances(x: &[Vec<f64>]) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(crate::stats::euclidean(&x[i], &x[j]));
        }
    }
    out
}
