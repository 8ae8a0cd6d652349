use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::problem::{EvalError, Problem};

/// One evaluated point: 1-based index, unit-cube location and raw value.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub eval_index: usize,
    pub x: Vec<f64>,
    pub y: f64,
}

/// Complete record of an optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub problem_id: String,
    pub optimizer: String,
    pub seed: u64,
    pub evals: Vec<Evaluation>,
    /// Running minimum of `y`.
    pub incumbent: Vec<f64>,
    pub metadata: BTreeMap<String, String>,
}

impl Trace {
    pub fn new(problem_id: &str, optimizer: &str, seed: u64) -> Self {
        Self {
            problem_id: problem_id.to_owned(),
            optimizer: optimizer.to_owned(),
            seed,
            evals: Vec::new(),
            incumbent: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.evals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.evals.is_empty()
    }

    pub fn push(&mut self, x: Vec<f64>, y: f64) {
        let best = self.incumbent.last().map_or(y, |b| b.min(y));
        self.evals.push(Evaluation {
            eval_index: self.evals.len() + 1,
            x,
            y,
        });
        self.incumbent.push(best);
    }

    pub fn final_best(&self) -> Option<f64> {
        self.incumbent.last().copied()
    }

    /// First 1-based evaluation index whose incumbent reaches `target`.
    pub fn first_hit(&self, target: f64) -> Option<usize> {
        self.incumbent.iter().position(|v| *v <= target).map(|i| i + 1)
    }

    pub fn csv_header(dim: usize) -> String {
        let mut h = String::from("problem_id,optimizer,seed,eval_index");
        for j in 1..=dim {
            h.push_str(&format!(",x{j}"));
        }
        h.push_str(",y,incumbent");
        h
    }

    /// Writes the trace as CSV with a header row. Floats use the shortest
    /// representation that round-trips.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let dim = self.evals.first().map_or(0, |e| e.x.len());
        writeln!(w, "{}", Self::csv_header(dim))?;
        for (e, inc) in self.evals.iter().zip(&self.incumbent) {
            write!(w, "{},{},{},{}", self.problem_id, self.optimizer, self.seed, e.eval_index)?;
            for v in &e.x {
                write!(w, ",{v}")?;
            }
            writeln!(w, ",{},{}", e.y, inc)?;
        }
        Ok(())
    }

    /// Parses the output of [`Trace::write_csv`]. Metadata is not part of
    /// the CSV and comes back empty.
    pub fn read_csv(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("empty trace file")?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 6 || cols[..4] != ["problem_id", "optimizer", "seed", "eval_index"] {
            return Err(format!("unexpected trace header: {header}"));
        }
        let dim = cols.len() - 6;
        let mut trace: Option<Trace> = None;
        for (ln, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != cols.len() {
                return Err(format!("row {}: expected {} fields", ln + 2, cols.len()));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| format!("row {}: {e}", ln + 2));
            let t = trace.get_or_insert_with(|| {
                Trace::new(f[0], f[1], f[2].parse().unwrap_or_default())
            });
            let x = f[4..4 + dim].iter().map(|s| num(s)).collect::<Result<Vec<_>, _>>()?;
            t.push(x, num(f[4 + dim])?);
        }
        trace.ok_or_else(|| "trace has no rows".to_owned())
    }
}

/// Budget-enforcing evaluation front end. Points are given in the unit
/// cube and mapped onto the problem's box before evaluation; every call is
/// recorded in the trace.
pub struct Evaluator<'a, P: Problem + ?Sized> {
    problem: &'a P,
    budget: usize,
    pub(crate) trace: Trace,
}

impl<'a, P: Problem + ?Sized> Evaluator<'a, P> {
    pub fn new(problem: &'a P, budget: usize, trace: Trace) -> Self {
        Self {
            problem,
            budget,
            trace,
        }
    }

    pub fn dim(&self) -> usize {
        self.problem.dim()
    }

    pub fn used(&self) -> usize {
        self.trace.len()
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.trace.len()
    }

    pub fn eval(&mut self, u: &[f64]) -> Result<f64, EvalError> {
        if self.trace.len() >= self.budget {
            return Err(EvalError::BudgetExhausted(self.budget));
        }
        let x = self.problem.domain().from_unit(u);
        let y = self.problem.evaluate(&x)?;
        if !y.is_finite() {
            return Err(EvalError::NonFiniteValue);
        }
        self.trace.push(u.to_vec(), y);
        Ok(y)
    }

    pub fn best(&self) -> Option<f64> {
        self.trace.final_best()
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }
}
