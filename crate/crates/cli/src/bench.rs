//! The benchmark campaign: every (problem, optimizer, replication) cell.

use hpoela::optimizers::{run, OptimizerError};
use hpoela::parallel::{self, Execution};
use hpoela::Problem;
use log::{info, warn};

use crate::config::{derive_seed, ExperimentConfig};
use crate::problems::{expand, ProblemEntry};
use crate::store::{cell_name, ResultStore};
use crate::{with_workers, CliError};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BenchSummary {
    pub cells: usize,
    /// Cells already complete in the store.
    pub skipped: usize,
    pub completed: usize,
    pub failed: Vec<String>,
    /// Objective evaluations spent by this invocation.
    pub evaluations: usize,
}

impl BenchSummary {
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.failed.is_empty())
    }
}

struct Cell<'a> {
    problem: &'a ProblemEntry,
    optimizer: usize,
    rep: usize,
}

enum Outcome {
    Done(usize),
    Failed(String),
}

pub fn cmd_bench(cfg: &ExperimentConfig, resume: bool) -> Result<(BenchSummary, ResultStore), CliError> {
    cfg.validate()?;
    let store = ResultStore::prepare(cfg, resume)?;
    let entries = expand(&cfg.problems);
    let mut summary = BenchSummary::default();
    let mut pending: Vec<Vec<Cell>> = Vec::new();
    for problem in &entries {
        let mut cells = Vec::new();
        for (optimizer, spec) in cfg.optimizers.iter().enumerate() {
            for rep in 0..cfg.replications {
                summary.cells += 1;
                if store.is_complete(&cell_name(&problem.id(), spec.name(), rep)) {
                    summary.skipped += 1;
                } else {
                    cells.push(Cell { problem, optimizer, rep });
                }
            }
        }
        if !cells.is_empty() {
            pending.push(cells);
        }
    }
    info!("{} cells, {} already complete", summary.cells, summary.skipped);

    let outcomes = with_workers(cfg.workers, || -> Result<Vec<Outcome>, CliError> {
        let mut out = Vec::new();
        for cells in &pending {
            let problem = cells[0].problem;
            let id = problem.id();
            match problem.open() {
                Ok(p) => {
                    let results = parallel::map(Execution::Parallel, cells, |c| run_cell(cfg, &store, &*p, &id, c));
                    for r in results {
                        out.push(r?);
                    }
                }
                Err(reason) => {
                    warn!("{id}: cannot open problem: {reason}");
                    for c in cells {
                        let cell = cell_name(&id, cfg.optimizers[c.optimizer].name(), c.rep);
                        store.write_failure(&cell, &reason)?;
                        out.push(Outcome::Failed(cell));
                    }
                }
            }
        }
        Ok(out)
    })??;

    for o in outcomes {
        match o {
            Outcome::Done(n) => {
                summary.completed += 1;
                summary.evaluations += n;
            }
            Outcome::Failed(cell) => summary.failed.push(cell),
        }
    }
    summary.failed.sort();
    Ok((summary, store))
}

fn run_cell(cfg: &ExperimentConfig, store: &ResultStore, problem: &dyn Problem, id: &str, c: &Cell) -> Result<Outcome, CliError> {
    let spec = &cfg.optimizers[c.optimizer];
    let cell = cell_name(id, spec.name(), c.rep);
    let seed = derive_seed(cfg.base_seed, &[id, spec.name(), &c.rep.to_string()]);
    let budget = cfg.budget_multiplier * problem.dim();
    match run(spec, &problem, budget, seed) {
        Ok(trace) => {
            store.write_trace(&cell, &trace)?;
            Ok(Outcome::Done(trace.len()))
        }
        Err(e) => {
            let reason = e.to_string();
            warn!("{cell} failed: {reason}");
            store.write_failure(&cell, &reason)?;
            if let OptimizerError::Evaluation { trace, .. } = e {
                let mut buf = Vec::new();
                trace.write_csv(&mut buf).map_err(CliError::io(&cell))?;
                crate::store::write_atomic(&store.failures_dir().join(format!("{cell}.partial.csv")), &buf)?;
            }
            Ok(Outcome::Failed(cell))
        }
    }
}
