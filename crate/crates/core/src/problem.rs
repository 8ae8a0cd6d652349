use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("domain needs at least one dimension")]
    Empty,
    #[error("bound vectors differ in length ({lower} lower vs {upper} upper)")]
    LengthMismatch { lower: usize, upper: usize },
    #[error("invalid bounds in dimension {index}: lower {lower} must be below upper {upper}")]
    InvalidBounds { index: usize, lower: f64, upper: f64 },
    #[error("point has {got} coordinates, domain has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("coordinate {index} = {value} lies outside [{lower}, {upper}]")]
    OutOfBounds {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
}

/// Error raised by a problem's evaluator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("point has {got} coordinates, problem has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("evaluation budget of {0} exhausted")]
    BudgetExhausted(usize),
    #[error("external evaluator: {0}")]
    External(String),
    #[error("objective returned a non-finite value")]
    NonFiniteValue,
}

/// Axis-aligned box `[lower, upper]` in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, DomainError> {
        if lower.len() != upper.len() {
            return Err(DomainError::LengthMismatch {
                lower: lower.len(),
                upper: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(DomainError::Empty);
        }
        for (index, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(DomainError::InvalidBounds {
                    index,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The hypercube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, DomainError> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn check_len(&self, x: &[f64]) -> Result<(), DomainError> {
        if x.len() != self.dim() {
            return Err(DomainError::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn check_contains(&self, x: &[f64]) -> Result<(), DomainError> {
        self.check_len(x)?;
        for (index, ((&v, &lo), &hi)) in x.iter().zip(&self.lower).zip(&self.upper).enumerate() {
            if !(v >= lo && v <= hi) {
                return Err(DomainError::OutOfBounds {
                    index,
                    value: v,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(())
    }

    /// Maps a unit-cube point into the box, clamping away rounding drift at
    /// the upper edge.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&ui, (&lo, &hi))| {
                if ui >= 1.0 {
                    hi
                } else if ui <= 0.0 {
                    lo
                } else {
                    (lo + ui * (hi - lo)).clamp(lo, hi)
                }
            })
            .collect()
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&xi, (&lo, &hi))| (xi - lo) / (hi - lo))
            .collect()
    }
}

/// A bounded, deterministic minimization problem.
///
/// Implementations must be safe to evaluate from several threads; stateful
/// backends (external processes) serialize requests internally.
pub trait Problem: Send + Sync {
    fn id(&self) -> &str;

    fn domain(&self) -> &BoxDomain;

    fn dim(&self) -> usize {
        self.domain().dim()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError>;
}

impl<P: Problem + ?Sized> Problem for &P {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn domain(&self) -> &BoxDomain {
        (**self).domain()
    }
    fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError> {
        (**self).evaluate(x)
    }
}

impl<P: Problem + ?Sized> Problem for Box<P> {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn domain(&self) -> &BoxDomain {
        (**self).domain()
    }
    fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError> {
        (**self).evaluate(x)
    }
}

impl<P: Problem + ?Sized> Problem for std::sync::Arc<P> {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn domain(&self) -> &BoxDomain {
        (**self).domain()
    }
    fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError> {
        (**self).evaluate(x)
    }
}
