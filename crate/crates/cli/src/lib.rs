//! Campaign orchestration behind the `hpoela` binary: configuration,
//! benchmark runs with resumable on-disk storage, feature extraction,
//! meta-analysis and report rendering.

pub mod analyze;
pub mod bench;
pub mod config;
pub mod features;
pub mod problems;
pub mod report;
pub mod store;

use thiserror::Error;

pub use config::ExperimentConfig;

/// Version of the on-disk formats (store manifest, feature matrix, report
/// bundle).
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("schema error (expected version {SCHEMA_VERSION}): {0}")]
    Schema(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("no problem produced a usable feature vector")]
    EmptyMatrix,
    #[error("analysis failed: {0}")]
    Analysis(String),
}

impl CliError {
    pub fn io(context: impl std::fmt::Display) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.to_string();
        move |source| CliError::Io { context, source }
    }

    /// Process exit code: 2 for configuration and schema problems, 1
    /// otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Schema(_) => 2,
            _ => 1,
        }
    }
}

/// Runs `f` on a pool of `workers` threads (0 = one per core).
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
        Ok(pool.install(f))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        Ok(f())
    }
}

/// Formats a float for CSV output; `Display` gives the shortest string
/// that parses back to the same value.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
