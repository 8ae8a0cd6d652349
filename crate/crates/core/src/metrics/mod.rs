//! Performance statistics over optimizer runs: normalized regret, expected
//! running time (ERT) against a baseline, rank tables, the Friedman test
//! and Nemenyi critical differences.

use std::collections::{BTreeMap, BTreeSet};

use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::optimizers::Trace;
use crate::stats::{average_ranks, mean, quantile_sorted, sd};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("empty input")]
    EmptyInput,
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("problem {0}: observed values have zero range")]
    DegenerateProblem(String),
    #[error("problem {0}: no runs of the baseline optimizer")]
    MissingBaseline(String),
    #[error("no runs for problem {problem} and optimizer {optimizer}")]
    IncompleteData { problem: String, optimizer: String },
    #[error("need at least {needed} {what}, got {got}")]
    TooFew {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("no critical-difference constant for {k} optimizers at alpha {alpha}")]
    UnsupportedK { k: usize, alpha: f64 },
}

/// Summary of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem_id: String,
    pub optimizer: String,
    pub seed: u64,
    pub final_best: f64,
    /// Largest objective value the run observed.
    pub worst: f64,
    /// Running minimum after each evaluation.
    pub incumbent: Vec<f64>,
}

impl RunRecord {
    /// `None` for an empty trace.
    pub fn from_trace(trace: &Trace) -> Option<Self> {
        Some(Self {
            problem_id: trace.problem_id.clone(),
            optimizer: trace.optimizer.clone(),
            seed: trace.seed,
            final_best: trace.final_best()?,
            worst: trace.evals.iter().map(|e| e.y).fold(f64::NEG_INFINITY, f64::max),
            incumbent: trace.incumbent.clone(),
        })
    }

    pub fn evals_used(&self) -> usize {
        self.incumbent.len()
    }

    /// 1-based index of the first evaluation whose incumbent reaches
    /// `target`.
    pub fn first_hit(&self, target: f64) -> Option<usize> {
        self.incumbent.iter().position(|v| *v <= target).map(|i| i + 1)
    }
}

/// `(incumbent - best_overall) / range` for every step of a run.
pub fn normalized_regret(incumbent: &[f64], best_overall: f64, range: f64) -> Result<Vec<f64>, MetricsError> {
    if !(range > 0.0) {
        return Err(MetricsError::DegenerateProblem(String::new()));
    }
    Ok(incumbent.iter().map(|v| (v - best_overall) / range).collect())
}

/// Total evaluations over all replications divided by the number of
/// successful ones; `None` when nothing succeeded.
pub fn ert(evals_used: &[usize], success: &[bool]) -> Result<Option<f64>, MetricsError> {
    if evals_used.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if evals_used.len() != success.len() {
        return Err(MetricsError::LengthMismatch(evals_used.len(), success.len()));
    }
    let hits = success.iter().filter(|s| **s).count();
    if hits == 0 {
        return Ok(None);
    }
    Ok(Some(evals_used.iter().sum::<usize>() as f64 / hits as f64))
}

/// Factor applied to the worst finite ERT of a problem for optimizers that
/// never reach the target.
pub const ERT_PENALTY: f64 = 10.0;

/// Per-problem ERTs and ratios against a baseline optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct ErtTable {
    pub problems: Vec<String>,
    pub optimizers: Vec<String>,
    pub baseline: String,
    /// Median final value of the baseline's runs.
    pub targets: Vec<f64>,
    /// `[problem][optimizer]`, penalized where nothing succeeded.
    pub ert: Vec<Vec<f64>>,
    pub penalized: Vec<Vec<bool>>,
    pub ratio: Vec<Vec<f64>>,
}

fn group<'a>(records: &'a [RunRecord]) -> BTreeMap<(&'a str, &'a str), Vec<&'a RunRecord>> {
    let mut g: BTreeMap<(&str, &str), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        g.entry((r.problem_id.as_str(), r.optimizer.as_str())).or_default().push(r);
    }
    g
}

fn names(records: &[RunRecord]) -> (Vec<String>, Vec<String>) {
    let p: BTreeSet<&str> = records.iter().map(|r| r.problem_id.as_str()).collect();
    let o: BTreeSet<&str> = records.iter().map(|r| r.optimizer.as_str()).collect();
    (
        p.into_iter().map(str::to_owned).collect(),
        o.into_iter().map(str::to_owned).collect(),
    )
}

/// ERT of every optimizer on every problem, with the target set to the
/// median final value of the `baseline` runs on that problem. A run's
/// evaluation count is its first target hit, or its full length when it
/// never hits.
pub fn ert_ratio_table(records: &[RunRecord], baseline: &str) -> Result<ErtTable, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let (problems, optimizers) = names(records);
    let groups = group(records);
    let mut table = ErtTable {
        problems: problems.clone(),
        optimizers: optimizers.clone(),
        baseline: baseline.to_owned(),
        targets: Vec::new(),
        ert: Vec::new(),
        penalized: Vec::new(),
        ratio: Vec::new(),
    };
    for p in &problems {
        let base = groups
            .get(&(p.as_str(), baseline))
            .ok_or_else(|| MetricsError::MissingBaseline(p.clone()))?;
        let mut finals: Vec<f64> = base.iter().map(|r| r.final_best).collect();
        finals.sort_by(f64::total_cmp);
        let target = quantile_sorted(&finals, 0.5);

        let mut row: Vec<Option<f64>> = Vec::new();
        for o in &optimizers {
            let runs = groups.get(&(p.as_str(), o.as_str())).ok_or_else(|| MetricsError::IncompleteData {
                problem: p.clone(),
                optimizer: o.clone(),
            })?;
            let hits: Vec<Option<usize>> = runs.iter().map(|r| r.first_hit(target)).collect();
            let used: Vec<usize> = runs
                .iter()
                .zip(&hits)
                .map(|(r, h)| h.unwrap_or(r.evals_used()))
                .collect();
            let success: Vec<bool> = hits.iter().map(Option::is_some).collect();
            row.push(ert(&used, &success)?);
        }
        let worst = row.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        let erts: Vec<f64> = row.iter().map(|e| e.unwrap_or(ERT_PENALTY * worst)).collect();
        let bi = optimizers.iter().position(|o| o == baseline).expect("baseline has runs");
        table.ratio.push(erts.iter().map(|e| e / erts[bi]).collect());
        table.penalized.push(row.iter().map(Option::is_none).collect());
        table.ert.push(erts);
        table.targets.push(target);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregate {
    #[default]
    Arithmetic,
    Geometric,
}

pub fn aggregate(values: &[f64], kind: Aggregate) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(match kind {
        Aggregate::Arithmetic => mean(values),
        Aggregate::Geometric => (values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp(),
    })
}

/// Ranks of the optimizers on each problem (rank 1 = best, ties averaged).
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub problems: Vec<String>,
    pub optimizers: Vec<String>,
    /// `[problem][optimizer]`.
    pub ranks: Vec<Vec<f64>>,
}

impl RankTable {
    pub fn from_values(problems: Vec<String>, optimizers: Vec<String>, values: &[Vec<f64>]) -> Self {
        Self {
            ranks: values.iter().map(|row| average_ranks(row)).collect(),
            problems,
            optimizers,
        }
    }

    pub fn mean_ranks(&self) -> Vec<f64> {
        (0..self.optimizers.len())
            .map(|j| self.ranks.iter().map(|r| r[j]).sum::<f64>() / self.ranks.len() as f64)
            .collect()
    }

    /// Restricts the table to the given problems, keeping their order.
    pub fn subset(&self, keep: impl Fn(&str) -> bool) -> Self {
        let idx: Vec<usize> = (0..self.problems.len()).filter(|i| keep(&self.problems[*i])).collect();
        Self {
            problems: idx.iter().map(|i| self.problems[*i].clone()).collect(),
            optimizers: self.optimizers.clone(),
            ranks: idx.iter().map(|i| self.ranks[*i].clone()).collect(),
        }
    }
}

/// Ranks optimizers per problem by their mean final value over
/// replications.
pub fn rank_by_final(records: &[RunRecord]) -> Result<RankTable, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let (problems, optimizers) = names(records);
    let groups = group(records);
    let mut values = Vec::with_capacity(problems.len());
    for p in &problems {
        let mut row = Vec::with_capacity(optimizers.len());
        for o in &optimizers {
            let runs = groups.get(&(p.as_str(), o.as_str())).ok_or_else(|| MetricsError::IncompleteData {
                problem: p.clone(),
                optimizer: o.clone(),
            })?;
            row.push(runs.iter().map(|r| r.final_best).sum::<f64>() / runs.len() as f64);
        }
        values.push(row);
    }
    Ok(RankTable::from_values(problems, optimizers, &values))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Friedman {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Friedman rank test with the tie-corrected denominator.
pub fn friedman(table: &RankTable) -> Result<Friedman, MetricsError> {
    let k = table.optimizers.len();
    let n = table.ranks.len();
    if k < 2 {
        return Err(MetricsError::TooFew {
            what: "optimizers",
            needed: 2,
            got: k,
        });
    }
    if n < 2 {
        return Err(MetricsError::TooFew {
            what: "problems",
            needed: 2,
            got: n,
        });
    }
    let (kf, nf) = (k as f64, n as f64);
    let sum_sq: f64 = table.ranks.iter().flatten().map(|r| r * r).sum();
    let c = nf * kf * (kf + 1.0).powi(2) / 4.0;
    let spread: f64 = (0..k)
        .map(|j| {
            let rj: f64 = table.ranks.iter().map(|r| r[j]).sum();
            (rj - nf * (kf + 1.0) / 2.0).powi(2)
        })
        .sum();
    let denom = sum_sq - c;
    let df = k - 1;
    if denom <= 1e-12 * c {
        return Ok(Friedman {
            statistic: 0.0,
            df,
            p_value: 1.0,
        });
    }
    let statistic = ((kf - 1.0) * spread / denom).max(0.0);
    let chi = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    Ok(Friedman {
        statistic,
        df,
        p_value: chi.sf(statistic),
    })
}

const NEMENYI_Q_05: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];
const NEMENYI_Q_10: [f64; 9] = [1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920];

/// Critical difference of mean ranks for `k` optimizers on `n` problems.
/// Supports `alpha` 0.05 and 0.10 and `k` from 2 to 10.
pub fn nemenyi_cd(k: usize, n: usize, alpha: f64) -> Result<f64, MetricsError> {
    let table = if (alpha - 0.05).abs() < 1e-12 {
        &NEMENYI_Q_05
    } else if (alpha - 0.10).abs() < 1e-12 {
        &NEMENYI_Q_10
    } else {
        return Err(MetricsError::UnsupportedK { k, alpha });
    };
    if !(2..=10).contains(&k) {
        return Err(MetricsError::UnsupportedK { k, alpha });
    }
    if n < 2 {
        return Err(MetricsError::TooFew {
            what: "problems",
            needed: 2,
            got: n,
        });
    }
    let (kf, nf) = (k as f64, n as f64);
    Ok(table[k - 2] * (kf * (kf + 1.0) / (6.0 * nf)).sqrt())
}

/// Mean normalized regret of one optimizer on one problem at every
/// evaluation index, with its standard error across replications.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub problem_id: String,
    pub optimizer: String,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
}

/// Regret curves for every (problem, optimizer) pair. Regret is measured
/// from the best value any run found on the problem and scaled by the
/// range of all values observed there. Runs shorter than the longest one
/// are padded with their final incumbent.
pub fn regret_curves(records: &[RunRecord]) -> Result<Vec<RegretCurve>, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let groups = group(records);
    let (problems, optimizers) = names(records);
    let mut out = Vec::new();
    for p in &problems {
        let runs: Vec<&RunRecord> = records.iter().filter(|r| &r.problem_id == p).collect();
        let best = runs.iter().map(|r| r.final_best).fold(f64::INFINITY, f64::min);
        let worst = runs.iter().map(|r| r.worst).fold(f64::NEG_INFINITY, f64::max);
        let range = worst - best;
        if !(range > 0.0) {
            return Err(MetricsError::DegenerateProblem(p.clone()));
        }
        let len = runs.iter().map(|r| r.evals_used()).max().unwrap_or(0);
        for o in &optimizers {
            let Some(reps) = groups.get(&(p.as_str(), o.as_str())) else {
                continue;
            };
            let curves: Vec<Vec<f64>> = reps
                .iter()
                .map(|r| {
                    let mut c = normalized_regret(&r.incumbent, best, range)?;
                    let last = *c.last().unwrap_or(&1.0);
                    c.resize(len, last);
                    Ok(c)
                })
                .collect::<Result<_, MetricsError>>()?;
            let m = curves.len() as f64;
            let mut mean_c = Vec::with_capacity(len);
            let mut se = Vec::with_capacity(len);
            for t in 0..len {
                let col: Vec<f64> = curves.iter().map(|c| c[t]).collect();
                mean_c.push(mean(&col));
                se.push(if curves.len() > 1 { sd(&col) / m.sqrt() } else { 0.0 });
            }
            out.push(RegretCurve {
                problem_id: p.clone(),
                optimizer: o.clone(),
                mean: mean_c,
                std_error: se,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(problem: &str, opt: &str, seed: u64, curve: Vec<f64>) -> RunRecord {
        RunRecord {
            problem_id: problem.into(),
            optimizer: opt.into(),
            seed,
            final_best: *curve.last().unwrap(),
            worst: curve[0],
            incumbent: curve,
        }
    }

    #[test]
    fn regret_examples() {
        let r = normalized_regret(&[0.3, 0.2], 0.2, 0.5).unwrap();
        assert!((r[0] - 0.2).abs() < 1e-15);
        assert_eq!(r[1], 0.0);
        assert!((normalized_regret(&[0.7], 0.2, 0.5).unwrap()[0] - 1.0).abs() < 1e-15);
        assert!(normalized_regret(&[0.1], 0.1, 0.0).is_err());
    }

    #[test]
    fn ert_examples() {
        let used = [100; 10];
        let success: Vec<bool> = (0..10).map(|i| i < 5).collect();
        assert_eq!(ert(&used, &success).unwrap(), Some(200.0));
        assert_eq!(ert(&[40; 10], &[true; 10]).unwrap(), Some(40.0));
        assert_eq!(ert(&[100; 10], &[false; 10]).unwrap(), None);
        assert!(ert(&[], &[]).is_err());
    }

    #[test]
    fn baseline_against_itself_and_half_speed() {
        let mut records = Vec::new();
        for s in 0..10u64 {
            // random reaches 1.0 at eval 10 in half the runs
            let hit = if s % 2 == 0 { 0.5 } else { 2.0 };
            let mut c = vec![5.0; 20];
            for v in c.iter_mut().skip(9) {
                *v = hit;
            }
            records.push(rec("p", "random", s, c));
            let mut fast = vec![5.0; 20];
            for v in fast.iter_mut().skip(4) {
                *v = 0.1;
            }
            records.push(rec("p", "fast", s, fast));
        }
        let t = ert_ratio_table(&records, "random").unwrap();
        let ri = t.optimizers.iter().position(|o| o == "random").unwrap();
        let fi = t.optimizers.iter().position(|o| o == "fast").unwrap();
        assert_eq!(t.targets[0], 1.25);
        assert_eq!(t.ratio[0][ri], 1.0);
        // random: (5*10 + 5*20)/5 = 30, fast: 5 every run
        assert_eq!(t.ert[0][ri], 30.0);
        assert!((t.ratio[0][fi] - 5.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn failures_get_ten_times_the_worst_finite_ert() {
        let mut records = Vec::new();
        for s in 0..2u64 {
            records.push(rec("p", "random", s, vec![3.0, 1.0]));
            records.push(rec("p", "never", s, vec![9.0, 9.0]));
        }
        let t = ert_ratio_table(&records, "random").unwrap();
        let ni = t.optimizers.iter().position(|o| o == "never").unwrap();
        assert!(t.penalized[0][ni]);
        assert_eq!(t.ert[0][ni], 10.0 * 2.0);
        assert!(matches!(
            ert_ratio_table(&records, "grid"),
            Err(MetricsError::MissingBaseline(_))
        ));
    }

    #[test]
    fn ranks_with_ties() {
        let t = RankTable::from_values(
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into(), "z".into()],
            &[vec![0.1, 0.2, 0.3], vec![0.1, 0.1, 0.3]],
        );
        assert_eq!(t.ranks[0], vec![1.0, 2.0, 3.0]);
        assert_eq!(t.ranks[1], vec![1.5, 1.5, 3.0]);
    }

    #[test]
    fn friedman_hand_computation() {
        // 4 problems, 3 optimizers, no ties: R = (4, 9, 11)
        let ranks = vec![
            vec![1.0, 2.0, 3.0],
            vec![1.0, 3.0, 2.0],
            vec![1.0, 2.0, 3.0],
            vec![1.0, 2.0, 3.0],
        ];
        let t = RankTable {
            problems: (0..4).map(|i| i.to_string()).collect(),
            optimizers: vec!["a".into(), "b".into(), "c".into()],
            ranks,
        };
        let f = friedman(&t).unwrap();
        let expected = 12.0 / (4.0 * 3.0 * 4.0) * (16.0 + 81.0 + 121.0) - 3.0 * 4.0 * 4.0;
        assert!((f.statistic - expected).abs() < 1e-12);
        assert_eq!(f.df, 2);
        assert!((f.p_value - (-expected / 2.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn friedman_all_tied() {
        let t = RankTable {
            problems: vec!["a".into(), "b".into()],
            optimizers: vec!["x".into(), "y".into()],
            ranks: vec![vec![1.5, 1.5], vec![1.5, 1.5]],
        };
        let f = friedman(&t).unwrap();
        assert_eq!((f.statistic, f.p_value), (0.0, 1.0));
    }

    #[test]
    fn critical_differences() {
        assert!((nemenyi_cd(2, 9, 0.05).unwrap() - 1.960 / 3.0).abs() < 1e-12);
        let a = nemenyi_cd(5, 10, 0.05).unwrap();
        assert!((nemenyi_cd(5, 40, 0.05).unwrap() - a / 2.0).abs() < 1e-12);
        assert!(matches!(nemenyi_cd(11, 10, 0.05), Err(MetricsError::UnsupportedK { .. })));
        assert!(nemenyi_cd(5, 10, 0.10).unwrap() < a);
    }

    #[test]
    fn regret_curves_are_padded() {
        let records = vec![
            rec("p", "a", 0, vec![4.0, 2.0, 1.0]),
            rec("p", "b", 0, vec![3.0, 3.0]),
        ];
        let c = regret_curves(&records).unwrap();
        assert_eq!(c[1].mean, vec![2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]);
        assert_eq!(c[0].mean, vec![1.0, 1.0 / 3.0, 0.0]);
    }
}
