use super::HpoError;

const CLAMP: f64 = 1e-15;

/// Row-major `n x g` matrix of predicted class probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProbabilities {
    values: Vec<f64>,
    classes: usize,
}

impl ClassProbabilities {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, HpoError> {
        let classes = rows.first().map_or(0, Vec::len);
        if classes == 0 {
            return Err(HpoError::InvalidProbabilities("no classes".into()));
        }
        let mut values = Vec::with_capacity(rows.len() * classes);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != classes {
                return Err(HpoError::InvalidProbabilities(format!(
                    "row {i} has {} entries, expected {classes}",
                    r.len()
                )));
            }
            values.extend(r);
        }
        Self::from_flat(values, classes)
    }

    pub fn from_flat(values: Vec<f64>, classes: usize) -> Result<Self, HpoError> {
        if classes == 0 || !values.len().is_multiple_of(classes) {
            return Err(HpoError::InvalidProbabilities("ragged matrix".into()));
        }
        for (i, row) in values.chunks(classes).enumerate() {
            if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(HpoError::InvalidProbabilities(format!(
                    "row {i} has entry {p} outside [0, 1]"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-6 {
                return Err(HpoError::InvalidProbabilities(format!(
                    "row {i} sums to {s}"
                )));
            }
        }
        Ok(Self { values, classes })
    }

    pub fn rows(&self) -> usize {
        self.values.len() / self.classes
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.classes..(i + 1) * self.classes]
    }
}

/// Mean negative log-probability of the true class, probabilities clamped to
/// `[1e-15, 1 - 1e-15]`.
pub fn logloss(probs: &ClassProbabilities, labels: &[usize]) -> Result<f64, HpoError> {
    if probs.rows() != labels.len() {
        return Err(HpoError::LengthMismatch {
            rows: probs.rows(),
            labels: labels.len(),
        });
    }
    let mut total = 0.0;
    for (row, &label) in labels.iter().enumerate() {
        if label >= probs.classes() {
            return Err(HpoError::InvalidLabel {
                row,
                label,
                classes: probs.classes(),
            });
        }
        let p = probs.row(row)[label].clamp(CLAMP, 1.0 - CLAMP);
        total -= p.ln();
    }
    Ok(total / labels.len() as f64)
}
