//! Campaign configuration: JSON on disk, validated before anything runs.

use std::path::{Path, PathBuf};

use hpoela::analysis::CartParams;
use hpoela::bbob::NUM_FUNCTIONS;
use hpoela::hpo::BundledDataset;
use hpoela::optimizers::OptimizerSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BbobGrid {
    pub fids: Vec<u32>,
    pub iids: Vec<u32>,
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyHpoSpec {
    pub datasets: Vec<BundledDataset>,
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalSpec {
    pub id: String,
    /// Program and arguments.
    pub command: Vec<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
}

fn default_timeout() -> f64 {
    60.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSet {
    pub bbob: Option<BbobGrid>,
    pub toy_hpo: Option<ToyHpoSpec>,
    pub external: Vec<ExternalSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureSettings {
    /// Design size is this multiple of the dimension.
    pub sample_multiplier: usize,
    pub design_restarts: usize,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        Self {
            sample_multiplier: 50,
            design_restarts: hpoela::design::DEFAULT_RESTARTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSettings {
    pub baseline: String,
    pub cart: CartParams,
    pub cv_folds: usize,
    pub cv_repeats: usize,
    pub kmeans_restarts: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub seed: u64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            baseline: "random".into(),
            cart: CartParams::default(),
            cv_folds: 10,
            cv_repeats: 10,
            kmeans_restarts: 25,
            k_min: 2,
            k_max: 8,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problems: ProblemSet,
    #[serde(default = "default_optimizers")]
    pub optimizers: Vec<OptimizerSpec>,
    #[serde(default = "default_multiplier")]
    pub budget_multiplier: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// 0 uses all available cores.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub features: FeatureSettings,
    #[serde(default)]
    pub analysis: AnalysisSettings,
}

fn default_optimizers() -> Vec<OptimizerSpec> {
    OptimizerSpec::roster()
}
fn default_multiplier() -> usize {
    50
}
fn default_replications() -> usize {
    10
}
fn default_output() -> PathBuf {
    PathBuf::from("hpoela-out")
}

pub const OUTPUT_DIR_ENV: &str = "HPOELA_OUTPUT_DIR";
pub const WORKERS_ENV: &str = "HPOELA_WORKERS";

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads the file and applies the environment overrides.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            cfg.output_dir = PathBuf::from(dir);
        }
        if let Ok(w) = std::env::var(WORKERS_ENV) {
            cfg.workers = w
                .parse()
                .map_err(|_| CliError::Config(format!("{WORKERS_ENV}={w:?} is not a worker count")))?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if let Some(g) = &self.problems.bbob {
            if g.fids.is_empty() || g.iids.is_empty() || g.dims.is_empty() {
                return bad("bbob grid has an empty axis".into());
            }
            if let Some(f) = g.fids.iter().find(|f| !(1..=NUM_FUNCTIONS).contains(*f)) {
                return bad(format!("bbob fid {f} outside 1..={NUM_FUNCTIONS}"));
            }
            if g.iids.contains(&0) || g.dims.contains(&0) {
                return bad("bbob iids and dims must be positive".into());
            }
        }
        if let Some(t) = &self.problems.toy_hpo {
            if let Some(d) = t.dims.iter().find(|d| ![2, 3, 5].contains(*d)) {
                return bad(format!("toy HPO dimension {d} not in {{2, 3, 5}}"));
            }
        }
        for e in &self.problems.external {
            if e.id.is_empty() || e.id.contains(['/', '\\', ',', '\n']) || e.id.contains("__") {
                return bad(format!("external id {:?} must be non-empty without '/', ',' or '__'", e.id));
            }
            if e.command.is_empty() {
                return bad(format!("external {}: empty command", e.id));
            }
            if !(e.timeout_secs > 0.0) {
                return bad(format!("external {}: timeout must be positive", e.id));
            }
        }
        let mut ids: Vec<String> = crate::problems::expand(&self.problems).iter().map(|p| p.id()).collect();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return bad(format!("problem {} listed twice", w[0]));
        }
        if self.optimizers.is_empty() {
            return bad("no optimizers".into());
        }
        let mut names: Vec<&str> = self.optimizers.iter().map(|o| o.name()).collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return bad("each optimizer variant may appear once".into());
        }
        for o in &self.optimizers {
            o.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if self.budget_multiplier == 0 || self.replications == 0 {
            return bad("budget_multiplier and replications must be positive".into());
        }
        let f = &self.features;
        if f.sample_multiplier == 0 || f.design_restarts == 0 {
            return bad("feature sample_multiplier and design_restarts must be positive".into());
        }
        let a = &self.analysis;
        if a.cv_folds < 2 || a.cv_repeats == 0 || a.kmeans_restarts == 0 || a.k_min < 2 || a.k_max < a.k_min {
            return bad("analysis settings out of range".into());
        }
        if a.cart.min_leaf == 0 {
            return bad("cart min_leaf must be positive".into());
        }
        Ok(())
    }

    /// Digest of everything that determines the benchmark traces. Output
    /// location and worker count are excluded.
    pub fn bench_hash(&self) -> String {
        let v = serde_json::json!({
            "problems": self.problems,
            "optimizers": self.optimizers,
            "budget_multiplier": self.budget_multiplier,
            "replications": self.replications,
            "base_seed": self.base_seed,
        });
        hex_digest(v.to_string().as_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `base ^ h` where `h` is the first eight bytes of the SHA-256 of `parts`
/// joined by a unit separator.
pub fn derive_seed(base: u64, parts: &[&str]) -> u64 {
    let digest = Sha256::digest(parts.join("\u{1f}").as_bytes());
    base ^ u64::from_le_bytes(digest[..8].try_into().unwrap())
}
