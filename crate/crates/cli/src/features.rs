//! Feature extraction: one LHS design per problem, all landscape feature
//! sets, written as a problems × features CSV.

use std::path::{Path, PathBuf};

use hpoela::analysis::{FeatureMatrix, ProblemClass};
use hpoela::design::{Design, DesignError, ElaSample};
use hpoela::ela::{compute_all, CATALOG};
use hpoela::parallel::{self, Execution};
use log::{info, warn};

use crate::config::{derive_seed, ExperimentConfig};
use crate::problems::{expand, ProblemEntry};
use crate::store::write_atomic;
use crate::{fmt_f64, with_workers, CliError, SCHEMA_VERSION};

pub const METADATA_COLUMNS: [&str; 3] = ["problem_id", "class", "dim"];
pub const FEATURES_FILE: &str = "features.csv";
pub const EXCLUDED_FILE: &str = "features_excluded.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct Exclusion {
    pub problem_id: String,
    /// `degenerate-sample` or `evaluation-failure`.
    pub kind: &'static str,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeaturesSummary {
    pub path: PathBuf,
    pub matrix: FeatureMatrix,
    pub excluded: Vec<Exclusion>,
}

fn features_for(cfg: &ExperimentConfig, entry: &ProblemEntry) -> Result<(usize, Vec<f64>), Exclusion> {
    let id = entry.id();
    let fail = |kind, reason: String| Exclusion {
        problem_id: id.clone(),
        kind,
        reason,
    };
    let problem = entry.open().map_err(|r| fail("evaluation-failure", r))?;
    let dim = problem.dim();
    let seed = derive_seed(cfg.base_seed, &["design", &id]);
    let n = cfg.features.sample_multiplier * dim;
    let design = Design::sample(&*problem, n, seed, cfg.features.design_restarts).map_err(|e| match e {
        DesignError::Evaluation { .. } => fail("evaluation-failure", e.to_string()),
        _ => fail("degenerate-sample", e.to_string()),
    })?;
    let sample = ElaSample::from_design(&design).map_err(|e| fail("degenerate-sample", e.to_string()))?;
    let fv = compute_all(&sample).map_err(|e| fail("degenerate-sample", e.to_string()))?;
    Ok((dim, fv.values()))
}

/// Computes features for every configured problem and writes
/// `features.csv` and `features_excluded.csv` into the output directory.
pub fn cmd_features(cfg: &ExperimentConfig) -> Result<FeaturesSummary, CliError> {
    cfg.validate()?;
    let entries = expand(&cfg.problems);
    let results = with_workers(cfg.workers, || parallel::map(Execution::Parallel, &entries, |e| features_for(cfg, e)))?;

    let mut ids = Vec::new();
    let mut classes = Vec::new();
    let mut dims = Vec::new();
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for (entry, r) in entries.iter().zip(results) {
        match r {
            Ok((dim, values)) => {
                ids.push(entry.id());
                classes.push(entry.class());
                dims.push(dim);
                rows.push(values);
            }
            Err(x) => {
                warn!("{}: {}: excluded: {}", x.kind, x.problem_id, x.reason);
                excluded.push(x);
            }
        }
    }
    std::fs::create_dir_all(&cfg.output_dir).map_err(CliError::io(cfg.output_dir.display()))?;
    let cfg_json = serde_json::to_string_pretty(cfg).expect("config serializes");
    write_atomic(&cfg.output_dir.join("config.json"), cfg_json.as_bytes())?;
    let mut ex = String::from("problem_id,kind,reason\n");
    for x in &excluded {
        ex.push_str(&format!("{},{},{}\n", x.problem_id, x.kind, x.reason.replace([',', '\n'], ";")));
    }
    write_atomic(&cfg.output_dir.join(EXCLUDED_FILE), ex.as_bytes())?;
    if rows.is_empty() {
        return Err(CliError::EmptyMatrix);
    }
    let columns = CATALOG.iter().map(|s| s.to_string()).collect();
    let matrix = FeatureMatrix::new(ids, classes, dims, columns, rows).map_err(|e| CliError::Analysis(e.to_string()))?;
    let path = cfg.output_dir.join(FEATURES_FILE);
    write_atomic(&path, to_csv(&matrix).as_bytes())?;
    info!("{} problems with features, {} excluded", matrix.len(), excluded.len());
    Ok(FeaturesSummary { path, matrix, excluded })
}

pub fn to_csv(m: &FeatureMatrix) -> String {
    let mut out = METADATA_COLUMNS.join(",");
    for c in &m.columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for i in 0..m.len() {
        out.push_str(&format!("{},{},{}", m.ids[i], m.classes[i].as_str(), m.dims[i]));
        for v in &m.rows[i] {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

/// Reads a feature CSV and checks its columns against the catalog.
pub fn read_csv(path: &Path) -> Result<FeatureMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path.display()))?;
    let schema = |m: String| CliError::Schema(format!("{} (feature schema v{SCHEMA_VERSION}): {m}", path.display()));
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| schema("empty file".into()))?.split(',').collect();
    let expected: Vec<&str> = METADATA_COLUMNS.iter().chain(CATALOG.iter()).copied().collect();
    if header != expected {
        return Err(schema("header does not match the feature catalog".into()));
    }
    let (mut ids, mut classes, mut dims, mut rows) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (ln, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != expected.len() {
            return Err(schema(format!("row {} has {} fields", ln + 2, f.len())));
        }
        ids.push(f[0].to_string());
        classes.push(ProblemClass::parse(f[1]).ok_or_else(|| schema(format!("row {}: unknown class {:?}", ln + 2, f[1])))?);
        dims.push(f[2].parse().map_err(|_| schema(format!("row {}: bad dim", ln + 2)))?);
        rows.push(
            f[3..]
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| schema(format!("row {}: {e}", ln + 2)))?,
        );
    }
    let columns = CATALOG.iter().map(|s| s.to_string()).collect();
    FeatureMatrix::new(ids, classes, dims, columns, rows).map_err(|e| schema(e.to_string()))
}
