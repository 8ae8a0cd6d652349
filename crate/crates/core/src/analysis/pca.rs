//! Principal component analysis on centred, unit-variance columns.

use nalgebra::DMatrix;
use serde::Serialize;

use super::AnalysisError;
use crate::stats::{mean, sd};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaModel {
    pub columns: Vec<String>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// `[feature][component]`; columns are orthonormal.
    pub loadings: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.explained_variance_ratio.len()
    }

    /// Scales `row` with the fitted means and scales and projects it.
    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = row
            .iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| (v - m) / s)
            .collect();
        (0..self.n_components())
            .map(|c| z.iter().zip(&self.loadings).map(|(zj, l)| zj * l[c]).sum())
            .collect()
    }
}

/// Fits `n_components` principal components and returns the model with the
/// training scores. Each component's sign is fixed so that its loading of
/// largest magnitude is positive.
pub fn pca_fit(
    columns: &[String],
    rows: &[Vec<f64>],
    n_components: usize,
) -> Result<(PcaModel, Vec<Vec<f64>>), AnalysisError> {
    let n = rows.len();
    let p = columns.len();
    if n < 2 || p == 0 {
        return Err(AnalysisError::EmptyInput);
    }
    let max = (n - 1).min(p);
    if n_components == 0 || n_components > max {
        return Err(AnalysisError::TooManyComponents {
            requested: n_components,
            max,
        });
    }
    let mut means = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    for j in 0..p {
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let s = sd(&col);
        if !(s > 0.0) {
            return Err(AnalysisError::ConstantColumn(columns[j].clone()));
        }
        means.push(mean(&col));
        scales.push(s);
    }
    let z = DMatrix::from_fn(n, p, |i, j| (rows[i][j] - means[j]) / scales[j]);
    let svd = z.svd(false, true);
    let v_t = svd.v_t.ok_or(AnalysisError::Svd)?;
    let sv = &svd.singular_values;
    let total: f64 = sv.iter().map(|s| s * s).sum();

    let mut loadings = vec![vec![0.0; n_components]; p];
    for c in 0..n_components {
        let row = v_t.row(c);
        let pivot = (0..p).fold(0, |best, j| if row[j].abs() > row[best].abs() { j } else { best });
        let sign = if row[pivot] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..p {
            loadings[j][c] = sign * row[j];
        }
    }
    let model = PcaModel {
        columns: columns.to_vec(),
        means,
        scales,
        loadings,
        explained_variance_ratio: (0..n_components).map(|c| sv[c] * sv[c] / total).collect(),
    };
    let scores = rows.iter().map(|r| model.transform(r)).collect();
    Ok((model, scores))
}
