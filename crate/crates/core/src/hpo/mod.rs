//! Continuous hyperparameter-optimization problems.
//!
//! * [`space`]: bounded search spaces with linear/log scales and the
//!   internal-to-external transformation applied before each evaluation.
//! * [`logloss`]: the multi-class logarithmic loss.
//! * [`toy`]: native HPO problems tuning a small multinomial logistic learner
//!   under fixed 10-fold cross-validation on bundled data sets.
//! * [`external`]: client side of the line-delimited JSON evaluator protocol.

pub mod external;
pub mod logloss;
pub mod space;
pub mod toy;

use thiserror::Error;

pub use external::{evaluate_external, EvaluatorInfo, ExternalError, ExternalEvaluator};
pub use logloss::{logloss, ClassProbabilities};
pub use space::{to_eval_space, ParamSpec, Scale, SearchSpaceSpec};
pub use toy::{evaluate_toy_hpo, BundledDataset, Dataset, LearnerConfig, ToyHpoProblem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HpoError {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("internal point outside the search box: {0}")]
    Domain(#[from] crate::problem::DomainError),
    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),
    #[error("label {label} at row {row} outside 0..{classes}")]
    InvalidLabel {
        row: usize,
        label: usize,
        classes: usize,
    },
    #[error("{rows} probability rows for {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("data set: {0}")]
    Dataset(String),
    #[error("toy problems support dimensions 2, 3 and 5, got {0}")]
    UnsupportedDimension(usize),
}
