//! On-disk result store.
//!
//! ```text
//! <root>/config.json                          validated configuration
//! <root>/manifest.json                        schema version, config hash, parameter versions
//! <root>/traces/<problem>__<optimizer>__<rep>.csv   one file per completed cell
//! <root>/failures/<problem>__<optimizer>__<rep>.txt failure reason (cell rerun on resume)
//! ```
//!
//! Every file is written to a temporary name and renamed into place, so a
//! trace file exists only once its cell has finished.

use std::fs;
use std::path::{Path, PathBuf};

use hpoela::optimizers::Trace;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::{CliError, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config_hash: String,
    /// Parameters of every module, so a store describes how it was made.
    pub parameters: serde_json::Value,
}

impl Manifest {
    pub fn for_config(cfg: &ExperimentConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: cfg.bench_hash(),
            parameters: serde_json::json!({
                "optimizers": cfg.optimizers,
                "budget_multiplier": cfg.budget_multiplier,
                "replications": cfg.replications,
                "base_seed": cfg.base_seed,
                "features": cfg.features,
                "analysis": cfg.analysis,
            }),
        }
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(CliError::io(tmp.display()))?;
    fs::rename(&tmp, path).map_err(CliError::io(path.display()))
}

pub fn cell_name(problem: &str, optimizer: &str, rep: usize) -> String {
    format!("{problem}__{optimizer}__{rep}")
}

#[derive(Debug, Clone)]
pub struct ResultStore {
    root: PathBuf,
}

impl ResultStore {
    /// Prepares `root` for a benchmark run. An existing store is reused
    /// only with `resume`, and only if its configuration hash matches.
    pub fn prepare(cfg: &ExperimentConfig, resume: bool) -> Result<Self, CliError> {
        let root = cfg.output_dir.clone();
        let store = Self { root };
        let manifest = Manifest::for_config(cfg);
        match store.manifest() {
            Ok(existing) => {
                if !resume {
                    return Err(CliError::Config(format!(
                        "{} already holds a store; pass --resume to continue it",
                        store.root.display()
                    )));
                }
                if existing.config_hash != manifest.config_hash {
                    return Err(CliError::Config(format!(
                        "manifest hash mismatch in {}: store was made with a different configuration",
                        store.root.display()
                    )));
                }
            }
            Err(CliError::Io { .. }) => {}
            Err(e) => return Err(e),
        }
        for dir in [store.traces_dir(), store.failures_dir()] {
            fs::create_dir_all(&dir).map_err(CliError::io(dir.display()))?;
        }
        let cfg_json = serde_json::to_string_pretty(cfg).expect("config serializes");
        write_atomic(&store.root.join("config.json"), cfg_json.as_bytes())?;
        let man_json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        write_atomic(&store.root.join("manifest.json"), man_json.as_bytes())?;
        Ok(store)
    }

    /// Opens an existing store for reading.
    pub fn open(root: &Path) -> Result<Self, CliError> {
        let store = Self { root: root.to_path_buf() };
        store.manifest()?;
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn traces_dir(&self) -> PathBuf {
        self.root.join("traces")
    }

    pub fn failures_dir(&self) -> PathBuf {
        self.root.join("failures")
    }

    pub fn manifest(&self) -> Result<Manifest, CliError> {
        let path = self.root.join("manifest.json");
        let text = fs::read_to_string(&path).map_err(CliError::io(path.display()))?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!("{} has schema version {}", path.display(), m.schema_version)));
        }
        Ok(m)
    }

    pub fn config(&self) -> Result<ExperimentConfig, CliError> {
        let path = self.root.join("config.json");
        let text = fs::read_to_string(&path).map_err(CliError::io(path.display()))?;
        ExperimentConfig::from_json(&text)
    }

    pub fn trace_path(&self, cell: &str) -> PathBuf {
        self.traces_dir().join(format!("{cell}.csv"))
    }

    pub fn failure_path(&self, cell: &str) -> PathBuf {
        self.failures_dir().join(format!("{cell}.txt"))
    }

    pub fn is_complete(&self, cell: &str) -> bool {
        self.trace_path(cell).is_file()
    }

    pub fn write_trace(&self, cell: &str, trace: &Trace) -> Result<(), CliError> {
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).map_err(CliError::io(cell))?;
        write_atomic(&self.trace_path(cell), &buf)?;
        for stale in [self.failure_path(cell), self.failures_dir().join(format!("{cell}.partial.csv"))] {
            if stale.exists() {
                fs::remove_file(&stale).map_err(CliError::io(stale.display()))?;
            }
        }
        Ok(())
    }

    pub fn write_failure(&self, cell: &str, reason: &str) -> Result<(), CliError> {
        write_atomic(&self.failure_path(cell), format!("{reason}\n").as_bytes())
    }

    /// Names of failed cells, sorted.
    pub fn failures(&self) -> Result<Vec<String>, CliError> {
        list(&self.failures_dir(), ".txt")
    }

    /// Every completed trace, in file-name order.
    pub fn load_traces(&self) -> Result<Vec<Trace>, CliError> {
        list(&self.traces_dir(), ".csv")?
            .into_iter()
            .map(|cell| {
                let path = self.trace_path(&cell);
                let text = fs::read_to_string(&path).map_err(CliError::io(path.display()))?;
                Trace::read_csv(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
            })
            .collect()
    }
}

fn list(dir: &Path, suffix: &str) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(CliError::io(dir.display()))? {
        let name = entry.map_err(CliError::io(dir.display()))?.file_name();
        if let Some(stem) = name.to_string_lossy().strip_suffix(suffix) {
            out.push(stem.to_string());
        }
    }
    out.sort();
    Ok(out)
}
