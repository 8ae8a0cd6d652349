//! Turns the configured problem set into evaluable problems.

use std::time::Duration;

use hpoela::analysis::ProblemClass;
use hpoela::bbob::instantiate_bbob;
use hpoela::hpo::{ExternalEvaluator, ToyHpoProblem};
use hpoela::Problem;

use crate::config::{ExternalSpec, ProblemSet};

/// A configured problem before it is instantiated. External evaluators are
/// only spawned when [`ProblemEntry::open`] is called.
#[derive(Debug, Clone)]
pub enum ProblemEntry {
    Bbob { fid: u32, iid: u32, dim: usize },
    Toy { dataset: hpoela::hpo::BundledDataset, dim: usize },
    External(ExternalSpec),
}

impl ProblemEntry {
    pub fn id(&self) -> String {
        match self {
            Self::Bbob { fid, iid, dim } => format!("{fid}_{iid}_{dim}"),
            Self::Toy { dataset, dim } => format!("{}_{dim}", dataset.name()),
            Self::External(e) => e.id.clone(),
        }
    }

    pub fn class(&self) -> ProblemClass {
        match self {
            Self::Bbob { .. } => ProblemClass::Bbob,
            _ => ProblemClass::Hpo,
        }
    }

    pub fn open(&self) -> Result<Box<dyn Problem>, String> {
        match self {
            Self::Bbob { fid, iid, dim } => instantiate_bbob(*fid, *iid, *dim)
                .map(|p| Box::new(p) as Box<dyn Problem>)
                .map_err(|e| e.to_string()),
            Self::Toy { dataset, dim } => ToyHpoProblem::new(*dataset, *dim)
                .map(|p| Box::new(p) as Box<dyn Problem>)
                .map_err(|e| e.to_string()),
            Self::External(e) => {
                let timeout = Duration::from_secs_f64(e.timeout_secs);
                ExternalEvaluator::spawn(&e.id, &e.command, timeout)
                    .map(|p| Box::new(p) as Box<dyn Problem>)
                    .map_err(|err| err.to_string())
            }
        }
    }
}

/// All problems in a fixed order: BBOB by (fid, iid, dim), then toy HPO by
/// (data set, dim), then external evaluators as listed.
pub fn expand(set: &ProblemSet) -> Vec<ProblemEntry> {
    let mut out = Vec::new();
    if let Some(g) = &set.bbob {
        for &fid in &g.fids {
            for &iid in &g.iids {
                for &dim in &g.dims {
                    out.push(ProblemEntry::Bbob { fid, iid, dim });
                }
            }
        }
    }
    if let Some(t) = &set.toy_hpo {
        for &dataset in &t.datasets {
            for &dim in &t.dims {
                out.push(ProblemEntry::Toy { dataset, dim });
            }
        }
    }
    out.extend(set.external.iter().cloned().map(ProblemEntry::External));
    out
}
