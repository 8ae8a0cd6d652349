//! Meta-level analysis of landscape features: the problem × feature matrix,
//! principal components, k-means clustering with silhouette selection,
//! CART decision trees, repeated stratified cross-validation and the
//! nearest-BBOB-neighbour lookup in component space.

pub mod cart;
pub mod cv;
pub mod kmeans;
pub mod neighbors;
pub mod pca;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cart::{cart_predict, cart_train, CartParams, Node, TreeModel};
pub use cv::{holdout_error, repeated_stratified_cv, stratified_folds, CvResult, MajorityClass, Trainer};
pub use kmeans::{kmeans, silhouette, silhouette_select, KMeans, SilhouetteSelection};
pub use neighbors::{nearest_bbob_neighbor, NeighborMatch};
pub use pca::{pca_fit, PcaModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("empty input")]
    EmptyInput,
    #[error("row {row} has {got} values, expected {expected}")]
    RaggedRow { row: usize, expected: usize, got: usize },
    #[error("row {row}, column {column}: value is not finite")]
    NonFinite { row: usize, column: String },
    #[error("column {0} has zero variance")]
    ConstantColumn(String),
    #[error("requested {requested} components, at most {max} available")]
    TooManyComponents { requested: usize, max: usize },
    #[error("invalid k = {k} for {rows} rows")]
    InvalidK { k: usize, rows: usize },
    #[error("need at least two classes")]
    SingleClass,
    #[error("class {class} has {members} members, fewer than {folds} folds")]
    Stratification { class: usize, members: usize, folds: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("singular value decomposition failed")]
    Svd,
}

/// Which family a problem comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemClass {
    Bbob,
    Hpo,
}

impl ProblemClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bbob => "bbob",
            Self::Hpo => "hpo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bbob" => Some(Self::Bbob),
            "hpo" => Some(Self::Hpo),
            _ => None,
        }
    }

    /// Class index used by the classifiers (BBOB = 0, HPO = 1).
    pub fn index(self) -> usize {
        self as usize
    }
}

/// Problems × features, with family and dimension labels per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub classes: Vec<ProblemClass>,
    pub dims: Vec<usize>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    /// Validates shape and finiteness.
    pub fn new(
        ids: Vec<String>,
        classes: Vec<ProblemClass>,
        dims: Vec<usize>,
        columns: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, AnalysisError> {
        let n = rows.len();
        if n == 0 {
            return Err(AnalysisError::EmptyInput);
        }
        for (what, len) in [("ids", ids.len()), ("classes", classes.len()), ("dims", dims.len())] {
            if len != n {
                return Err(AnalysisError::InvalidParam(format!("{what} has {len} entries for {n} rows")));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(AnalysisError::RaggedRow {
                    row: i,
                    expected: columns.len(),
                    got: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(AnalysisError::NonFinite {
                    row: i,
                    column: columns[j].clone(),
                });
            }
        }
        Ok(Self {
            ids,
            classes,
            dims,
            columns,
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Keeps the rows for which `keep` holds, in order.
    pub fn filter_rows(&self, keep: impl Fn(usize) -> bool) -> Self {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        Self {
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            classes: idx.iter().map(|&i| self.classes[i]).collect(),
            dims: idx.iter().map(|&i| self.dims[i]).collect(),
            columns: self.columns.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Drops columns whose values are all identical, returning the names
    /// of the dropped columns.
    pub fn drop_constant_columns(&self) -> (Self, Vec<String>) {
        let keep: Vec<usize> = (0..self.columns.len())
            .filter(|&j| self.rows.iter().any(|r| r[j] != self.rows[0][j]))
            .collect();
        let dropped = (0..self.columns.len())
            .filter(|j| !keep.contains(j))
            .map(|j| self.columns[j].clone())
            .collect();
        let m = Self {
            columns: keep.iter().map(|&j| self.columns[j].clone()).collect(),
            rows: self.rows.iter().map(|r| keep.iter().map(|&j| r[j]).collect()).collect(),
            ..self.clone()
        };
        (m, dropped)
    }
}

/// Distinct labels in ascending order, and each row's index into them.
pub fn encode_labels<T: Ord + Clone>(labels: &[T]) -> (Vec<T>, Vec<usize>) {
    let mut distinct = labels.to_vec();
    distinct.sort();
    distinct.dedup();
    let codes = labels.iter().map(|l| distinct.binary_search(l).unwrap()).collect();
    (distinct, codes)
}
