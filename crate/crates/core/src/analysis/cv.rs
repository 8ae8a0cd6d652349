//! Repeated stratified k-fold cross-validation and holdout evaluation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::cart::{cart_predict, cart_train, CartParams, TreeModel};
use super::AnalysisError;
use crate::parallel::{self, Execution};

/// A classifier that can be fitted on labelled rows.
pub trait Trainer: Sync {
    type Model: Send;

    fn train(&self, x: &[Vec<f64>], y: &[usize]) -> Result<Self::Model, AnalysisError>;

    fn predict(&self, model: &Self::Model, row: &[f64]) -> usize;
}

impl Trainer for CartParams {
    type Model = TreeModel;

    fn train(&self, x: &[Vec<f64>], y: &[usize]) -> Result<TreeModel, AnalysisError> {
        cart_train(x, y, *self)
    }

    fn predict(&self, model: &TreeModel, row: &[f64]) -> usize {
        cart_predict(model, row)
    }
}

/// Always predicts the most frequent training class (lowest index on ties).
#[derive(Debug, Clone, Copy, Default)]
pub struct MajorityClass;

impl Trainer for MajorityClass {
    type Model = usize;

    fn train(&self, _x: &[Vec<f64>], y: &[usize]) -> Result<usize, AnalysisError> {
        let k = y.iter().max().ok_or(AnalysisError::EmptyInput)? + 1;
        let mut counts = vec![0usize; k];
        for &c in y {
            counts[c] += 1;
        }
        Ok((0..k).fold(0, |b, c| if counts[c] > counts[b] { c } else { b }))
    }

    fn predict(&self, model: &usize, _row: &[f64]) -> usize {
        *model
    }
}

/// Fold index of every row: each class is shuffled and dealt round-robin,
/// continuing where the previous class stopped, so every fold holds
/// ⌊n_c/k⌋ or ⌈n_c/k⌉ members of class c.
pub fn stratified_folds(y: &[usize], folds: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>, AnalysisError> {
    if folds < 2 {
        return Err(AnalysisError::InvalidParam("need at least 2 folds".into()));
    }
    let k = y.iter().max().ok_or(AnalysisError::EmptyInput)? + 1;
    let mut assignment = vec![0; y.len()];
    let mut next = 0;
    for class in 0..k {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < folds {
            return Err(AnalysisError::Stratification {
                class,
                members: members.len(),
                folds,
            });
        }
        members.shuffle(rng);
        for i in members {
            assignment[i] = next;
            next = (next + 1) % folds;
        }
    }
    Ok(assignment)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    /// Misclassification rate over all held-out predictions.
    pub error: f64,
    pub repeat_errors: Vec<f64>,
    pub folds: usize,
    pub repeats: usize,
}

/// `repeats` × `folds` stratified cross-validation. Repeat `r` shuffles with
/// stream `r` of a generator seeded with `seed`.
pub fn repeated_stratified_cv<T: Trainer>(
    x: &[Vec<f64>],
    y: &[usize],
    folds: usize,
    repeats: usize,
    seed: u64,
    trainer: &T,
    exec: Execution,
) -> Result<CvResult, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::InvalidParam(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if y.iter().collect::<std::collections::BTreeSet<_>>().len() < 2 {
        return Err(AnalysisError::SingleClass);
    }
    if repeats == 0 {
        return Err(AnalysisError::InvalidParam("repeats must be positive".into()));
    }
    let assignments = (0..repeats)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            stratified_folds(y, folds, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let wrong = parallel::map_range(exec, repeats * folds, |job| {
        let (r, f) = (job / folds, job % folds);
        let a = &assignments[r];
        let (mut tx, mut ty) = (Vec::new(), Vec::new());
        for i in (0..x.len()).filter(|&i| a[i] != f) {
            tx.push(x[i].clone());
            ty.push(y[i]);
        }
        let model = trainer.train(&tx, &ty)?;
        Ok::<usize, AnalysisError>((0..x.len()).filter(|&i| a[i] == f && trainer.predict(&model, &x[i]) != y[i]).count())
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let n = x.len() as f64;
    let repeat_errors: Vec<f64> = wrong.chunks(folds).map(|c| c.iter().sum::<usize>() as f64 / n).collect();
    Ok(CvResult {
        error: wrong.iter().sum::<usize>() as f64 / (n * repeats as f64),
        repeat_errors,
        folds,
        repeats,
    })
}

/// Trains on one set and returns the misclassification rate on another,
/// together with the predictions.
pub fn holdout_error<T: Trainer>(
    train_x: &[Vec<f64>],
    train_y: &[usize],
    test_x: &[Vec<f64>],
    test_y: &[usize],
    trainer: &T,
) -> Result<(f64, Vec<usize>), AnalysisError> {
    if test_x.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let model = trainer.train(train_x, train_y)?;
    let pred: Vec<usize> = test_x.iter().map(|r| trainer.predict(&model, r)).collect();
    let wrong = pred.iter().zip(test_y).filter(|(p, t)| p != t).count();
    Ok((wrong as f64 / test_x.len() as f64, pred))
}
