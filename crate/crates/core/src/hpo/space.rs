use crate::problem::{BoxDomain, DomainError};

use super::HpoError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub scale: Scale,
    #[serde(default)]
    pub round_to_int: bool,
}

impl ParamSpec {
    pub fn log(name: &str, lower: f64, upper: f64) -> Self {
        Self {
            name: name.to_owned(),
            lower,
            upper,
            scale: Scale::Log,
            round_to_int: false,
        }
    }

    pub fn linear(name: &str, lower: f64, upper: f64) -> Self {
        Self {
            name: name.to_owned(),
            lower,
            upper,
            scale: Scale::Linear,
            round_to_int: false,
        }
    }

    pub fn integer(mut self) -> Self {
        self.round_to_int = true;
        self
    }

    fn internal_bounds(&self) -> (f64, f64) {
        match self.scale {
            Scale::Linear => (self.lower, self.upper),
            Scale::Log => (self.lower.ln(), self.upper.ln()),
        }
    }
}

/// Ordered list of bounded parameters. Log parameters are optimized on
/// `[ln lower, ln upper]` and exponentiated before evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpaceSpec {
    params: Vec<ParamSpec>,
    internal: BoxDomain,
}

impl SearchSpaceSpec {
    pub fn new(params: Vec<ParamSpec>) -> Result<Self, HpoError> {
        if params.is_empty() {
            return Err(HpoError::InvalidSpace("no parameters".into()));
        }
        for (i, p) in params.iter().enumerate() {
            if !(p.lower < p.upper) {
                return Err(HpoError::InvalidSpace(format!(
                    "{}: lower {} not below upper {}",
                    p.name, p.lower, p.upper
                )));
            }
            if p.scale == Scale::Log && p.lower <= 0.0 {
                return Err(HpoError::InvalidSpace(format!(
                    "{}: log scale needs a positive lower bound",
                    p.name
                )));
            }
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(HpoError::InvalidSpace(format!("duplicate name {}", p.name)));
            }
        }
        let (lower, upper) = params.iter().map(ParamSpec::internal_bounds).unzip();
        let internal = BoxDomain::new(lower, upper)
            .map_err(|e| HpoError::InvalidSpace(e.to_string()))?;
        Ok(Self { params, internal })
    }

    /// The boosted-tree space: nrounds, eta (2D), lambda (3D), gamma and
    /// alpha (5D), all on log scale.
    pub fn xgboost(dim: usize) -> Result<Self, HpoError> {
        let all = [
            ParamSpec::log("nrounds", 3.0, 2000.0).integer(),
            ParamSpec::log("eta", (-7f64).exp(), 1.0),
            ParamSpec::log("lambda", (-7f64).exp(), 7f64.exp()),
            ParamSpec::log("gamma", (-10f64).exp(), 2f64.exp()),
            ParamSpec::log("alpha", (-7f64).exp(), 7f64.exp()),
        ];
        match dim {
            2 | 3 | 5 => Self::new(all[..dim].to_vec()),
            _ => Err(HpoError::UnsupportedDimension(dim)),
        }
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn internal_box(&self) -> &BoxDomain {
        &self.internal
    }

    pub fn to_eval_space(&self, z: &[f64]) -> Result<Vec<f64>, HpoError> {
        self.internal.check_contains(z)?;
        Ok(self
            .params
            .iter()
            .zip(z)
            .map(|(p, &v)| {
                let x = match p.scale {
                    Scale::Linear => v,
                    Scale::Log => v.exp(),
                };
                if p.round_to_int {
                    (x + 0.5).floor()
                } else {
                    x
                }
            })
            .collect())
    }

    /// Inverse of [`Self::to_eval_space`] for non-integer parameters.
    pub fn to_internal(&self, x: &[f64]) -> Result<Vec<f64>, HpoError> {
        if x.len() != self.dim() {
            return Err(DomainError::Dimension {
                expected: self.dim(),
                got: x.len(),
            }
            .into());
        }
        Ok(self
            .params
            .iter()
            .zip(x)
            .map(|(p, &v)| match p.scale {
                Scale::Linear => v,
                Scale::Log => v.ln(),
            })
            .collect())
    }
}

pub fn to_eval_space(space: &SearchSpaceSpec, z: &[f64]) -> Result<Vec<f64>, HpoError> {
    space.to_eval_space(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nrounds_lower_bound_maps_to_three() {
        let s = SearchSpaceSpec::xgboost(2).unwrap();
        let x = s.to_eval_space(&[3f64.ln(), -7.0]).unwrap();
        assert_eq!(x[0], 3.0);
        assert!((x[1] - (-7f64).exp()).abs() < 1e-18);
    }

    #[test]
    fn eta_upper_bound_is_one() {
        let s = SearchSpaceSpec::xgboost(2).unwrap();
        let x = s.to_eval_space(&[3f64.ln(), 0.0]).unwrap();
        assert_eq!(x[1], 1.0);
    }

    #[test]
    fn linear_passes_through() {
        let s = SearchSpaceSpec::new(vec![ParamSpec::linear("a", 0.0, 1.0)]).unwrap();
        assert_eq!(s.to_eval_space(&[0.4]).unwrap(), vec![0.4]);
    }

    #[test]
    fn outside_box_is_domain_error() {
        let s = SearchSpaceSpec::xgboost(2).unwrap();
        assert!(matches!(
            s.to_eval_space(&[0.0, 0.0]),
            Err(HpoError::Domain(DomainError::OutOfBounds { index: 0, .. }))
        ));
    }

    #[test]
    fn invalid_spaces() {
        assert!(SearchSpaceSpec::new(vec![ParamSpec::log("a", 0.0, 1.0)]).is_err());
        assert!(SearchSpaceSpec::new(vec![ParamSpec::linear("a", 1.0, 1.0)]).is_err());
        assert!(SearchSpaceSpec::new(vec![
            ParamSpec::linear("a", 0.0, 1.0),
            ParamSpec::linear("a", 0.0, 2.0)
        ])
        .is_err());
        let s = SearchSpaceSpec::xgboost(5).unwrap();
        assert_eq!(s.internal_box().lower()[3], -10.0);
        assert_eq!(s.internal_box().upper()[4], 7.0);
    }

    proptest! {
        #[test]
        fn round_trip_non_integer(u in proptest::collection::vec(0.0f64..=1.0, 4)) {
            let s = SearchSpaceSpec::new(vec![
                ParamSpec::log("eta", (-7f64).exp(), 1.0),
                ParamSpec::log("lambda", (-7f64).exp(), 7f64.exp()),
                ParamSpec::linear("w", -2.0, 3.0),
                ParamSpec::log("gamma", (-10f64).exp(), 2f64.exp()),
            ]).unwrap();
            let z = s.internal_box().from_unit(&u);
            let back = s.to_internal(&s.to_eval_space(&z).unwrap()).unwrap();
            for (a, b) in z.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
