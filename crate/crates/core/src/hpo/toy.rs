//! Native HPO problems: a multinomial logistic model trained by fixed-step
//! full-batch gradient descent, scored by 10-fold cross-validated logloss.
//!
//! The tuned knobs mirror the boosted-tree layout (iterations and step size
//! in 2D, L2 strength in 3D, L1 strength and label smoothing in 5D), all on
//! log scale. Fold membership is drawn once from a seed and stored, so
//! repeated evaluations of a configuration are bitwise identical.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::logloss::{logloss, ClassProbabilities};
use super::space::{ParamSpec, SearchSpaceSpec};
use super::HpoError;
use crate::problem::{BoxDomain, EvalError, Problem};

pub const FOLDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BundledDataset {
    /// Two linearly separable classes, 4 features.
    Separable2,
    /// Four overlapping Gaussian blobs, 6 features.
    Blobs4,
    /// Six classes arranged on a noisy ring, 8 features (4 pure noise).
    Ring6,
}

impl BundledDataset {
    pub const ALL: [BundledDataset; 3] = [Self::Separable2, Self::Blobs4, Self::Ring6];

    pub fn name(self) -> &'static str {
        match self {
            Self::Separable2 => "separable2",
            Self::Blobs4 => "blobs4",
            Self::Ring6 => "ring6",
        }
    }

    fn csv(self) -> &'static str {
        match self {
            Self::Separable2 => include_str!("data/separable2.csv"),
            Self::Blobs4 => include_str!("data/blobs4.csv"),
            Self::Ring6 => include_str!("data/ring6.csv"),
        }
    }

    pub fn load(self) -> Dataset {
        Dataset::from_csv_str(self.name(), self.csv()).expect("bundled data sets are well formed")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    /// Row-major `n x p`.
    pub features: Vec<f64>,
    pub n_features: usize,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl Dataset {
    /// Numeric CSV with a header; the last column holds 0-based class labels.
    pub fn from_csv_str(name: &str, text: &str) -> Result<Self, HpoError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| HpoError::Dataset("empty file".into()))?;
        let cols = header.split(',').count();
        if cols < 2 {
            return Err(HpoError::Dataset("need features and a class column".into()));
        }
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (i, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != cols {
                return Err(HpoError::Dataset(format!("row {i}: {} columns", cells.len())));
            }
            for c in &cells[..cols - 1] {
                features.push(
                    c.trim()
                        .parse::<f64>()
                        .map_err(|e| HpoError::Dataset(format!("row {i}: {e}")))?,
                );
            }
            labels.push(
                cells[cols - 1]
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| HpoError::Dataset(format!("row {i}: {e}")))?,
            );
        }
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        if labels.len() < FOLDS || n_classes < 2 {
            return Err(HpoError::Dataset("too few rows or classes".into()));
        }
        Ok(Self {
            name: name.to_owned(),
            features,
            n_features: cols - 1,
            labels,
            n_classes,
        })
    }

    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }
}

/// Training constants and defaults for knobs not tuned at lower dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub default_l2: f64,
    pub default_l1: f64,
    pub default_smoothing: f64,
    pub fold_seed: u64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            default_l2: 1e-3,
            default_l1: 0.0,
            default_smoothing: 0.0,
            fold_seed: 20_221,
        }
    }
}

/// Learner settings decoded from an external configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Settings {
    iterations: usize,
    learning_rate: f64,
    l2: f64,
    l1: f64,
    smoothing: f64,
}

#[derive(Debug, Clone)]
pub struct ToyHpoProblem {
    id: String,
    dataset: Arc<Dataset>,
    space: SearchSpaceSpec,
    folds: Vec<usize>,
    learner: LearnerConfig,
}

impl ToyHpoProblem {
    /// Cumulative toy space; the iteration lower bound rounds to zero so the
    /// lower corner is the untrained model.
    pub fn space(dim: usize) -> Result<SearchSpaceSpec, HpoError> {
        let all = [
            ParamSpec::log("iterations", 0.4, 200.0).integer(),
            ParamSpec::log("learning_rate", (-7f64).exp(), 1.0),
            ParamSpec::log("l2", (-7f64).exp(), 2f64.exp()),
            ParamSpec::log("l1", (-10f64).exp(), 1.0),
            ParamSpec::log("smoothing", (-10f64).exp(), (-1f64).exp()),
        ];
        match dim {
            2 | 3 | 5 => SearchSpaceSpec::new(all[..dim].to_vec()),
            _ => Err(HpoError::UnsupportedDimension(dim)),
        }
    }

    pub fn new(dataset: BundledDataset, dim: usize) -> Result<Self, HpoError> {
        Self::with_dataset(Arc::new(dataset.load()), dim, LearnerConfig::default())
    }

    pub fn with_dataset(
        dataset: Arc<Dataset>,
        dim: usize,
        learner: LearnerConfig,
    ) -> Result<Self, HpoError> {
        let space = Self::space(dim)?;
        let mut order: Vec<usize> = (0..dataset.rows()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(learner.fold_seed));
        let mut folds = vec![0; dataset.rows()];
        for (pos, &row) in order.iter().enumerate() {
            folds[row] = pos % FOLDS;
        }
        Ok(Self {
            id: format!("{}_{}", dataset.name, dim),
            dataset,
            space,
            folds,
            learner,
        })
    }

    pub fn search_space(&self) -> &SearchSpaceSpec {
        &self.space
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    /// Fold index of every data row.
    pub fn folds(&self) -> &[usize] {
        &self.folds
    }

    fn settings(&self, z: &[f64]) -> Result<Settings, HpoError> {
        let x = self.space.to_eval_space(z)?;
        Ok(Settings {
            iterations: x[0] as usize,
            learning_rate: x[1],
            l2: x.get(2).copied().unwrap_or(self.learner.default_l2),
            l1: x.get(3).copied().unwrap_or(self.learner.default_l1),
            smoothing: x.get(4).copied().unwrap_or(self.learner.default_smoothing),
        })
    }
}

pub fn evaluate_toy_hpo(problem: &ToyHpoProblem, z: &[f64]) -> Result<f64, HpoError> {
    let settings = problem.settings(z)?;
    let data = &*problem.dataset;
    let mut total = 0.0;
    for fold in 0..FOLDS {
        let train: Vec<usize> = (0..data.rows()).filter(|&i| problem.folds[i] != fold).collect();
        let test: Vec<usize> = (0..data.rows()).filter(|&i| problem.folds[i] == fold).collect();
        let model = Logistic::fit(data, &train, &settings);
        let probs = model.predict(data, &test);
        let labels: Vec<usize> = test.iter().map(|&i| data.labels[i]).collect();
        total += logloss(&probs, &labels)?;
    }
    Ok(total / FOLDS as f64)
}

impl Problem for ToyHpoProblem {
    fn id(&self) -> &str {
        &self.id
    }

    fn domain(&self) -> &BoxDomain {
        self.space.internal_box()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError> {
        evaluate_toy_hpo(self, x).map_err(|e| match e {
            HpoError::Domain(d) => EvalError::Domain(d),
            other => EvalError::External(other.to_string()),
        })
    }
}

/// Multinomial logistic model on fold-standardized features.
struct Logistic {
    mean: Vec<f64>,
    scale: Vec<f64>,
    /// `g x (p + 1)`, intercept last.
    weights: Vec<f64>,
    classes: usize,
}

impl Logistic {
    fn fit(data: &Dataset, rows: &[usize], s: &Settings) -> Self {
        let p = data.n_features;
        let g = data.n_classes;
        let n = rows.len() as f64;
        let mut mean = vec![0.0; p];
        for &i in rows {
            for (m, v) in mean.iter_mut().zip(data.row(i)) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; p];
        for &i in rows {
            for ((sc, v), m) in scale.iter_mut().zip(data.row(i)).zip(&mean) {
                *sc += (v - m) * (v - m) / n;
            }
        }
        for sc in &mut scale {
            *sc = if *sc > 0.0 { sc.sqrt() } else { 1.0 };
        }
        let xs: Vec<Vec<f64>> = rows
            .iter()
            .map(|&i| standardize(data.row(i), &mean, &scale))
            .collect();
        let off = s.smoothing / g as f64;
        let on = 1.0 - s.smoothing + off;

        let stride = p + 1;
        let mut w = vec![0.0; g * stride];
        let mut grad = vec![0.0; g * stride];
        let mut prob = vec![0.0; g];
        let shrink = 1.0 / (1.0 + s.learning_rate * s.l2);
        let thresh = s.learning_rate * s.l1;
        for _ in 0..s.iterations {
            grad.iter_mut().for_each(|v| *v = 0.0);
            for (x, &i) in xs.iter().zip(rows) {
                softmax_into(&w, x, g, &mut prob);
                let y = data.labels[i];
                for c in 0..g {
                    let target = if c == y { on } else { off };
                    let r = (prob[c] - target) / n;
                    let gc = &mut grad[c * stride..(c + 1) * stride];
                    for (gj, xj) in gc.iter_mut().zip(x) {
                        *gj += r * xj;
                    }
                    gc[p] += r;
                }
            }
            for c in 0..g {
                for j in 0..stride {
                    let k = c * stride + j;
                    let mut v = w[k] - s.learning_rate * grad[k];
                    if j < p {
                        v *= shrink;
                        v = v.signum() * (v.abs() - thresh).max(0.0);
                    }
                    w[k] = v;
                }
            }
        }
        Self {
            mean,
            scale,
            weights: w,
            classes: g,
        }
    }

    fn predict(&self, data: &Dataset, rows: &[usize]) -> ClassProbabilities {
        let mut out = Vec::with_capacity(rows.len() * self.classes);
        let mut prob = vec![0.0; self.classes];
        for &i in rows {
            let x = standardize(data.row(i), &self.mean, &self.scale);
            softmax_into(&self.weights, &x, self.classes, &mut prob);
            out.extend_from_slice(&prob);
        }
        ClassProbabilities::from_flat(out, self.classes).expect("softmax rows are normalized")
    }
}

fn standardize(row: &[f64], mean: &[f64], scale: &[f64]) -> Vec<f64> {
    row.iter()
        .zip(mean.iter().zip(scale))
        .map(|(v, (m, s))| (v - m) / s)
        .collect()
}

fn softmax_into(w: &[f64], x: &[f64], g: usize, out: &mut [f64]) {
    let stride = x.len() + 1;
    let mut max = f64::NEG_INFINITY;
    for c in 0..g {
        let wc = &w[c * stride..(c + 1) * stride];
        let logit: f64 = wc[..x.len()].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + wc[x.len()];
        out[c] = logit;
        max = max.max(logit);
    }
    let mut sum = 0.0;
    for v in out.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in out.iter_mut() {
        *v /= sum;
    }
}
