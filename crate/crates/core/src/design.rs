//! Initial designs: maximin Latin hypercubes in the unit cube, box
//! normalization and objective standardization.

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::problem::{BoxDomain, DomainError, EvalError, Problem};
use crate::stats;

pub const DEFAULT_RESTARTS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("design needs at least one point")]
    EmptyDesign,
    #[error("design needs at least one dimension")]
    ZeroDimension,
    #[error("need at least one restart")]
    NoRestarts,
    #[error("standardization needs at least two values, got {0}")]
    TooFewValues(usize),
    #[error("degenerate sample: objective values are constant")]
    DegenerateSample,
    #[error("sample shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("evaluating design point {index}: {source}")]
    Evaluation { index: usize, source: EvalError },
}

/// Evaluated design: points in the unit cube and raw objective values.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub problem_id: String,
    pub seed: u64,
}

impl Design {
    /// Samples a maximin LHS of `n` points and evaluates it on `problem`.
    pub fn sample<P: Problem + ?Sized>(
        problem: &P,
        n: usize,
        seed: u64,
        restarts: usize,
    ) -> Result<Self, DesignError> {
        let x = lhs_minmax(n, problem.dim(), seed, restarts)?;
        let mut y = Vec::with_capacity(n);
        for (index, u) in x.iter().enumerate() {
            let v = problem
                .evaluate(&denormalize(problem.domain(), u)?)
                .map_err(|source| DesignError::Evaluation { index, source })?;
            y.push(v);
        }
        Ok(Self {
            x,
            y,
            problem_id: problem.id().to_owned(),
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    /// CSV with header `x1..xd,y`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header: Vec<String> = (1..=self.dim()).map(|i| format!("x{i}")).collect();
        writeln!(w, "{},y", header.join(","))?;
        for (row, y) in self.x.iter().zip(&self.y) {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            writeln!(w, "{},{}", cells.join(","), y)?;
        }
        Ok(())
    }
}

/// Unit-cube sample with standardized objective values; the input to every
/// landscape feature.
#[derive(Debug, Clone, PartialEq)]
pub struct ElaSample {
    x: Vec<Vec<f64>>,
    z: Vec<f64>,
}

impl ElaSample {
    /// Wraps points and objective values as given (no standardization).
    pub fn new(x: Vec<Vec<f64>>, z: Vec<f64>) -> Result<Self, DesignError> {
        if x.is_empty() {
            return Err(DesignError::EmptyDesign);
        }
        if x.len() != z.len() {
            return Err(DesignError::Shape(format!("{} points, {} values", x.len(), z.len())));
        }
        let d = x[0].len();
        if d == 0 {
            return Err(DesignError::ZeroDimension);
        }
        if x.iter().any(|r| r.len() != d) {
            return Err(DesignError::Shape("ragged point matrix".into()));
        }
        if x.iter().flatten().chain(&z).any(|v| !v.is_finite()) {
            return Err(DesignError::Shape("non-finite entry".into()));
        }
        Ok(Self { x, z })
    }

    pub fn from_design(design: &Design) -> Result<Self, DesignError> {
        Self::new(design.x.clone(), standardize_y(&design.y)?)
    }

    pub fn x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x[0].len()
    }
}

/// Latin hypercube in `[0,1]^d`: among `restarts` random hypercubes the one
/// with the largest minimum pairwise distance is returned.
pub fn lhs_minmax(n: usize, d: usize, seed: u64, restarts: usize) -> Result<Vec<Vec<f64>>, DesignError> {
    if n == 0 {
        return Err(DesignError::EmptyDesign);
    }
    if d == 0 {
        return Err(DesignError::ZeroDimension);
    }
    if restarts == 0 {
        return Err(DesignError::NoRestarts);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for _ in 0..restarts {
        let cand = random_lhs(n, d, &mut rng);
        let score = min_pairwise_distance(&cand);
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, cand));
        }
    }
    Ok(best.expect("restarts >= 1").1)
}

fn random_lhs<R: Rng>(n: usize, d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut x = vec![vec![0.0; d]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..d {
        perm.shuffle(rng);
        for (i, &stratum) in perm.iter().enumerate() {
            // jitter away from the stratum edges so floor(v * n) recovers the stratum
            let u: f64 = rng.random_range(1e-9..1.0 - 1e-9);
            x[i][j] = (stratum as f64 + u) / n as f64;
        }
    }
    x
}

/// Smallest Euclidean distance between two rows; infinite for a single row.
pub fn min_pairwise_distance(x: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d2: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.min(d2);
        }
    }
    best.sqrt()
}

/// Affine map of a point inside `domain` onto the unit cube.
pub fn normalize(domain: &BoxDomain, x: &[f64]) -> Result<Vec<f64>, DesignError> {
    domain.check_contains(x)?;
    Ok(domain.to_unit(x))
}

/// Inverse of [`normalize`].
pub fn denormalize(domain: &BoxDomain, u: &[f64]) -> Result<Vec<f64>, DesignError> {
    let unit = BoxDomain::cube(domain.dim(), 0.0, 1.0)?;
    unit.check_contains(u)?;
    Ok(domain.from_unit(u))
}

/// `(y - mean) / sd` with the `n - 1` standard deviation.
pub fn standardize_y(y: &[f64]) -> Result<Vec<f64>, DesignError> {
    if y.len() < 2 {
        return Err(DesignError::TooFewValues(y.len()));
    }
    let m = stats::mean(y);
    let s = stats::sd(y);
    // values equal up to rounding can leave a spurious non-zero spread
    if !(s > 16.0 * f64::EPSILON * m.abs()) || !s.is_finite() {
        return Err(DesignError::DegenerateSample);
    }
    Ok(y.iter().map(|v| (v - m) / s).collect())
}

/// Exports a design's CSV to a string.
pub fn design_csv(design: &Design) -> String {
    let mut buf = Vec::new();
    design.write_csv(&mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, prop_assert_eq, prop_assume, proptest};

    #[test]
    fn one_point_per_quartile() {
        let x = lhs_minmax(4, 1, 3, 10).unwrap();
        let mut strata: Vec<usize> = x.iter().map(|r| (r[0] * 4.0).floor() as usize).collect();
        strata.sort();
        assert_eq!(strata, vec![0, 1, 2, 3]);
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(lhs_minmax(20, 3, 9, 5).unwrap(), lhs_minmax(20, 3, 9, 5).unwrap());
        assert_ne!(lhs_minmax(20, 3, 9, 5).unwrap(), lhs_minmax(20, 3, 10, 5).unwrap());
    }

    #[test]
    fn maximin_beats_plain_uniform_sampling() {
        let lhs = min_pairwise_distance(&lhs_minmax(50, 2, 11, 100).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let uniform: Vec<f64> = (0..100)
            .map(|_| {
                let pts: Vec<Vec<f64>> = (0..50)
                    .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
                    .collect();
                min_pairwise_distance(&pts)
            })
            .collect();
        assert!(lhs >= stats::median(&uniform), "{lhs} vs {}", stats::median(&uniform));
    }

    #[test]
    fn empty_design_rejected() {
        assert_eq!(lhs_minmax(0, 2, 1, 1).unwrap_err(), DesignError::EmptyDesign);
        assert_eq!(lhs_minmax(3, 2, 1, 0).unwrap_err(), DesignError::NoRestarts);
    }

    #[test]
    fn normalize_box() {
        let dom = BoxDomain::cube(2, -5.0, 5.0).unwrap();
        assert_eq!(normalize(&dom, &[0.0, -5.0]).unwrap(), vec![0.5, 0.0]);
        assert_eq!(normalize(&dom, &[5.0, 5.0]).unwrap(), vec![1.0, 1.0]);
        assert!(matches!(
            normalize(&dom, &[5.1, 0.0]),
            Err(DesignError::Domain(DomainError::OutOfBounds { .. }))
        ));
        assert!(denormalize(&dom, &[1.2, 0.0]).is_err());
    }

    #[test]
    fn normalize_round_trip() {
        let dom = BoxDomain::new(vec![-5.0, 0.001, 3.0], vec![5.0, 2.0, 1e4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let u: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
            let x = denormalize(&dom, &u).unwrap();
            let back = normalize(&dom, &x).unwrap();
            worst = worst.max(u.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
        assert!(worst <= 1e-12, "{worst}");
    }

    #[test]
    fn standardize_examples() {
        assert_eq!(standardize_y(&[1.0, 2.0, 3.0]).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(
            standardize_y(&[2.0, 2.0, 2.0]).unwrap_err(),
            DesignError::DegenerateSample
        );
        assert_eq!(standardize_y(&[2.0]).unwrap_err(), DesignError::TooFewValues(1));
    }

    #[test]
    fn design_csv_header() {
        let d = Design {
            x: vec![vec![0.25, 0.5], vec![0.75, 0.0]],
            y: vec![1.5, -2.0],
            problem_id: "p".into(),
            seed: 0,
        };
        assert_eq!(design_csv(&d), "x1,x2,y\n0.25,0.5,1.5\n0.75,0,-2\n");
    }

    proptest! {
        #[test]
        fn columns_are_permutations(n in 1usize..40, d in 1usize..5, seed in 0u64..1000) {
            let x = lhs_minmax(n, d, seed, 3).unwrap();
            for j in 0..d {
                let mut col: Vec<f64> = x.iter().map(|r| r[j]).collect();
                col.sort_by(f64::total_cmp);
                for (i, v) in col.iter().enumerate() {
                    prop_assert!((0.0..=1.0).contains(v));
                    prop_assert_eq!((v * n as f64).floor() as usize, i);
                }
            }
        }

        #[test]
        fn standardization_moments_and_affine_invariance(
            y in proptest::collection::vec(-1e3f64..1e3, 2..60),
            a in 0.01f64..100.0,
            b in -1e3f64..1e3,
        ) {
            prop_assume!(stats::sd(&y) > 1e-6);
            let z = standardize_y(&y).unwrap();
            prop_assert!(stats::mean(&z).abs() < 1e-9);
            prop_assert!((stats::sd(&z) - 1.0).abs() < 1e-9);
            let y2: Vec<f64> = y.iter().map(|v| a * v + b).collect();
            let z2 = standardize_y(&y2).unwrap();
            for (p, q) in z.iter().zip(&z2) {
                prop_assert!((p - q).abs() < 1e-9);
            }
        }
    }
}
