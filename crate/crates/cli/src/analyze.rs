//! The report bundle: performance statistics over the stored traces and
//! the meta-analysis of the feature matrix.
//!
//! Every file in the bundle is a pure function of the inputs; nothing
//! time- or path-dependent is written, so regeneration is byte-identical.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hpoela::analysis::{
    encode_labels, holdout_error, nearest_bbob_neighbor, pca_fit, repeated_stratified_cv, silhouette_select, FeatureMatrix,
    ProblemClass, Trainer,
};
use hpoela::metrics::{aggregate, ert_ratio_table, friedman, nemenyi_cd, rank_by_final, regret_curves, Aggregate, RunRecord};
use hpoela::parallel::Execution;
use hpoela::stats::{mean, sd};
use log::{info, warn};
use serde_json::{json, Value};

use crate::config::{AnalysisSettings, ExperimentConfig};
use crate::features::read_csv;
use crate::store::{write_atomic, ResultStore};
use crate::{fmt_f64, CliError, SCHEMA_VERSION};

pub const REPORT_DIR: &str = "report";

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeSummary {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
}

struct Bundle {
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

impl Bundle {
    fn add(&mut self, name: &str, content: String) {
        self.files.insert(name.to_string(), content);
    }

    fn add_json(&mut self, name: &str, v: &Value) {
        self.add(name, serde_json::to_string_pretty(v).expect("json serializes") + "\n");
    }

    fn write(mut self) -> Result<AnalyzeSummary, CliError> {
        std::fs::create_dir_all(&self.dir).map_err(CliError::io(self.dir.display()))?;
        let index: Vec<Value> = self
            .files
            .iter()
            .map(|(n, c)| json!({"file": n, "sha256": crate::config::hex_digest(c.as_bytes())}))
            .collect();
        self.add_json("bundle.json", &json!({"schema_version": SCHEMA_VERSION, "files": index}));
        for (name, content) in &self.files {
            write_atomic(&self.dir.join(name), content.as_bytes())?;
        }
        Ok(AnalyzeSummary {
            out_dir: self.dir,
            files: self.files.into_keys().collect(),
        })
    }
}

/// Builds the report bundle from a store and a feature matrix. Settings
/// come from the store's `config.json` when present. Without traces the
/// performance part is skipped.
pub fn cmd_analyze(store_dir: &Path, features: &Path, out: Option<&Path>) -> Result<AnalyzeSummary, CliError> {
    let cfg_path = store_dir.join("config.json");
    let settings = if cfg_path.is_file() {
        let text = std::fs::read_to_string(&cfg_path).map_err(CliError::io(cfg_path.display()))?;
        ExperimentConfig::from_json(&text)?.analysis
    } else {
        AnalysisSettings::default()
    };
    let matrix = read_csv(features)?;
    let mut bundle = Bundle {
        dir: out.map_or_else(|| store_dir.join(REPORT_DIR), Path::to_path_buf),
        files: BTreeMap::new(),
    };

    let traces = if store_dir.join("manifest.json").is_file() {
        ResultStore::open(store_dir)?.load_traces()?
    } else {
        Vec::new()
    };
    let dims: BTreeMap<String, usize> =
        traces.iter().filter_map(|t| Some((t.problem_id.clone(), t.evals.first()?.x.len()))).collect();
    let records: Vec<RunRecord> = traces.iter().filter_map(RunRecord::from_trace).collect();
    if records.is_empty() {
        info!("no traces in {}; skipping performance statistics", store_dir.display());
        bundle.add_json("performance.json", &json!({"skipped": "no traces in store"}));
    } else {
        performance(&mut bundle, &records, &dims, &settings)?;
    }
    landscape(&mut bundle, &matrix, &settings)?;
    bundle.write()
}

fn problem_dim(id: &str, dims: &BTreeMap<String, usize>) -> String {
    dims.get(id).map_or_else(|| "?".into(), |d| d.to_string())
}

fn performance(
    bundle: &mut Bundle,
    records: &[RunRecord],
    dims: &BTreeMap<String, usize>,
    settings: &AnalysisSettings,
) -> Result<(), CliError> {
    let err = |e: hpoela::metrics::MetricsError| CliError::Analysis(e.to_string());
    let optimizers: BTreeSet<&str> = records.iter().map(|r| r.optimizer.as_str()).collect();
    let mut by_problem: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_problem.entry(r.problem_id.as_str()).or_default().push(r);
    }
    // Problems need runs of every optimizer and a nonzero value range.
    let mut excluded = String::from("problem_id,reason\n");
    let mut keep: BTreeSet<&str> = BTreeSet::new();
    for (p, runs) in &by_problem {
        let have: BTreeSet<&str> = runs.iter().map(|r| r.optimizer.as_str()).collect();
        let best = runs.iter().map(|r| r.final_best).fold(f64::INFINITY, f64::min);
        let worst = runs.iter().map(|r| r.worst).fold(f64::NEG_INFINITY, f64::max);
        if have != optimizers {
            writeln!(excluded, "{p},missing optimizer runs").unwrap();
        } else if !(worst > best) {
            writeln!(excluded, "{p},zero value range").unwrap();
        } else {
            keep.insert(p);
        }
    }
    bundle.add("performance_excluded.csv", excluded);
    let recs: Vec<RunRecord> = records.iter().filter(|r| keep.contains(r.problem_id.as_str())).cloned().collect();
    if recs.is_empty() {
        bundle.add_json("performance.json", &json!({"skipped": "no complete problems"}));
        return Ok(());
    }

    let ranks = rank_by_final(&recs).map_err(err)?;
    let mut csv = format!("problem_id,dim,{}\n", ranks.optimizers.join(","));
    for (p, row) in ranks.problems.iter().zip(&ranks.ranks) {
        let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(csv, "{p},{},{}", problem_dim(p, dims), cells.join(",")).unwrap();
    }
    bundle.add("ranks.csv", csv);

    let mut scopes: Vec<(String, Box<dyn Fn(&str) -> bool>)> = vec![("all".into(), Box::new(|_: &str| true))];
    for d in keep.iter().filter_map(|p| dims.get(*p).copied()).collect::<BTreeSet<_>>() {
        let dims = dims.clone();
        scopes.push((format!("dim{d}"), Box::new(move |p: &str| dims.get(p) == Some(&d))));
    }
    let mut tests = Vec::new();
    for (scope, filter) in &scopes {
        let t = ranks.subset(|p| filter(p));
        if t.problems.len() < 2 {
            continue;
        }
        let f = friedman(&t).map_err(err)?;
        let k = t.optimizers.len();
        let n = t.problems.len();
        let mean_ranks: BTreeMap<&str, f64> = t.optimizers.iter().map(String::as_str).zip(t.mean_ranks()).collect();
        tests.push(json!({
            "scope": scope,
            "problems": n,
            "statistic": f.statistic,
            "df": f.df,
            "p_value": f.p_value,
            "critical_difference_0.05": nemenyi_cd(k, n, 0.05).ok(),
            "critical_difference_0.10": nemenyi_cd(k, n, 0.10).ok(),
            "mean_ranks": mean_ranks,
        }));
    }
    bundle.add_json("friedman.json", &json!({"tests": tests}));

    if optimizers.contains(settings.baseline.as_str()) {
        let table = ert_ratio_table(&recs, &settings.baseline).map_err(err)?;
        let mut csv = String::from("problem_id,optimizer,target,ert,penalized,ratio\n");
        for (i, p) in table.problems.iter().enumerate() {
            for (j, o) in table.optimizers.iter().enumerate() {
                writeln!(
                    csv,
                    "{p},{o},{},{},{},{}",
                    fmt_f64(table.targets[i]),
                    fmt_f64(table.ert[i][j]),
                    table.penalized[i][j],
                    fmt_f64(table.ratio[i][j])
                )
                .unwrap();
            }
        }
        bundle.add("ert.csv", csv);
        let mut summary = String::from("scope,optimizer,mean_ratio,geometric_mean_ratio\n");
        for (scope, filter) in &scopes {
            for (j, o) in table.optimizers.iter().enumerate() {
                let ratios: Vec<f64> = (0..table.problems.len())
                    .filter(|&i| filter(&table.problems[i]))
                    .map(|i| table.ratio[i][j])
                    .collect();
                if ratios.is_empty() {
                    continue;
                }
                let a = aggregate(&ratios, Aggregate::Arithmetic).map_err(err)?;
                let g = aggregate(&ratios, Aggregate::Geometric).map_err(err)?;
                writeln!(summary, "{scope},{o},{},{}", fmt_f64(a), fmt_f64(g)).unwrap();
            }
        }
        bundle.add("ert_summary.csv", summary);
    } else {
        warn!("baseline optimizer {} has no runs; ERT ratios skipped", settings.baseline);
    }

    let curves = regret_curves(&recs).map_err(err)?;
    let mut csv = String::from("problem_id,optimizer,eval,mean,std_error\n");
    let mut finals: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for c in &curves {
        for (t, (m, s)) in c.mean.iter().zip(&c.std_error).enumerate() {
            writeln!(csv, "{},{},{},{},{}", c.problem_id, c.optimizer, t + 1, fmt_f64(*m), fmt_f64(*s)).unwrap();
        }
        let last = *c.mean.last().unwrap_or(&f64::NAN);
        finals.entry(("all".into(), c.optimizer.clone())).or_default().push(last);
        let scope = format!("dim{}", problem_dim(&c.problem_id, dims));
        finals.entry((scope, c.optimizer.clone())).or_default().push(last);
    }
    bundle.add("regret.csv", csv);
    let mut summary = String::from("scope,optimizer,mean_final_regret\n");
    for ((scope, o), v) in &finals {
        writeln!(summary, "{scope},{o},{}", fmt_f64(mean(v))).unwrap();
    }
    bundle.add("regret_summary.csv", summary);
    bundle.add_json(
        "performance.json",
        &json!({"problems": keep.len(), "optimizers": optimizers, "runs": recs.len(), "baseline": settings.baseline}),
    );
    Ok(())
}

fn landscape(bundle: &mut Bundle, full: &FeatureMatrix, s: &AnalysisSettings) -> Result<(), CliError> {
    let err = |e: hpoela::analysis::AnalysisError| CliError::Analysis(e.to_string());
    let (m, dropped) = full.drop_constant_columns();
    if !dropped.is_empty() {
        warn!("constant feature columns dropped: {}", dropped.join(", "));
    }
    let n_comp = 2.min(m.columns.len()).min(m.len().saturating_sub(1));
    let mut landscape = json!({"problems": m.len(), "dropped_constant_columns": dropped});
    if n_comp < 2 {
        landscape["pca"] = json!({"skipped": "fewer than two components available"});
        bundle.add_json("landscape.json", &landscape);
        return Ok(());
    }
    let (pca, scores) = pca_fit(&m.columns, &m.rows, n_comp).map_err(err)?;
    let mut csv = String::from("feature,pc1,pc2\n");
    for (c, l) in m.columns.iter().zip(&pca.loadings) {
        writeln!(csv, "{c},{},{}", fmt_f64(l[0]), fmt_f64(l[1])).unwrap();
    }
    bundle.add("pca_loadings.csv", csv);
    landscape["pca"] = json!({"explained_variance_ratio": pca.explained_variance_ratio});

    // k-means on the centred and scaled component scores.
    let scaled: Vec<Vec<f64>> = {
        let cols: Vec<Vec<f64>> = (0..2).map(|c| scores.iter().map(|r| r[c]).collect()).collect();
        let ms: Vec<(f64, f64)> = cols.iter().map(|c| (mean(c), sd(c))).collect();
        scores.iter().map(|r| (0..2).map(|c| (r[c] - ms[c].0) / ms[c].1).collect()).collect()
    };
    let clusters = match silhouette_select(&scaled, s.k_min, s.k_max, s.seed, s.kmeans_restarts, Execution::Parallel) {
        Ok(sel) => {
            let widths: Vec<Value> = sel.widths.iter().map(|(k, w)| json!({"k": k, "mean_width": w})).collect();
            landscape["kmeans"] = json!({"best_k": sel.best_k, "silhouette": widths});
            Some(sel.clustering.assignments)
        }
        Err(e) => {
            landscape["kmeans"] = json!({"skipped": e.to_string()});
            None
        }
    };
    let mut csv = String::from("problem_id,class,dim,pc1,pc2,cluster\n");
    for i in 0..m.len() {
        let cl = clusters.as_ref().map_or(String::new(), |c| (c[i] + 1).to_string());
        writeln!(
            csv,
            "{},{},{},{},{},{cl}",
            m.ids[i],
            m.classes[i].as_str(),
            m.dims[i],
            fmt_f64(scores[i][0]),
            fmt_f64(scores[i][1])
        )
        .unwrap();
    }
    bundle.add("pca_scores.csv", csv);

    let pick = |class: ProblemClass| -> Vec<(String, Vec<f64>)> {
        (0..m.len()).filter(|&i| m.classes[i] == class).map(|i| (m.ids[i].clone(), scores[i].clone())).collect()
    };
    let (hpo, bbob) = (pick(ProblemClass::Hpo), pick(ProblemClass::Bbob));
    if !hpo.is_empty() && !bbob.is_empty() {
        let mut csv = String::from("hpo_id,bbob_id,distance\n");
        for nb in nearest_bbob_neighbor(&hpo, &bbob).map_err(err)? {
            writeln!(csv, "{},{},{}", nb.hpo_id, nb.bbob_id, fmt_f64(nb.distance)).unwrap();
        }
        bundle.add("nearest_bbob.csv", csv);
    }
    bundle.add_json("landscape.json", &landscape);

    let classification = json!({
        "hpo_vs_bbob": hpo_vs_bbob(&m, s).map_err(err)?,
        "dimensionality": dimensionality(&m, s).map_err(err)?,
    });
    bundle.add_json("classification.json", &classification);
    Ok(())
}

fn hpo_vs_bbob(m: &FeatureMatrix, s: &AnalysisSettings) -> Result<Value, hpoela::analysis::AnalysisError> {
    let y: Vec<usize> = m.classes.iter().map(|c| c.index()).collect();
    let smallest = [0, 1].iter().map(|c| y.iter().filter(|v| *v == c).count()).min().unwrap();
    let folds = s.cv_folds.min(smallest);
    if folds < 2 {
        return Ok(json!({"skipped": format!("smallest class has {smallest} problems")}));
    }
    let cv = repeated_stratified_cv(&m.rows, &y, folds, s.cv_repeats, s.seed, &s.cart, Execution::Parallel)?;
    let tree = s.cart.train(&m.rows, &y)?;
    Ok(json!({
        "classes": ["bbob", "hpo"],
        "folds": folds,
        "repeats": s.cv_repeats,
        "cv_error": cv.error,
        "repeat_errors": cv.repeat_errors,
        "tree": tree.root.to_json(&m.columns, &["bbob".into(), "hpo".into()]),
    }))
}

fn dimensionality(m: &FeatureMatrix, s: &AnalysisSettings) -> Result<Value, hpoela::analysis::AnalysisError> {
    let bbob: Vec<usize> = (0..m.len()).filter(|&i| m.classes[i] == ProblemClass::Bbob).collect();
    let bx: Vec<Vec<f64>> = bbob.iter().map(|&i| m.rows[i].clone()).collect();
    let (dims, y) = encode_labels(&bbob.iter().map(|&i| m.dims[i]).collect::<Vec<_>>());
    if dims.len() < 2 {
        return Ok(json!({"skipped": "BBOB problems span fewer than two dimensions"}));
    }
    let smallest = (0..dims.len()).map(|c| y.iter().filter(|v| **v == c).count()).min().unwrap();
    let folds = s.cv_folds.min(smallest);
    let names: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
    let tree = s.cart.train(&bx, &y)?;
    let mut out = json!({
        "classes": names,
        "tree": tree.root.to_json(&m.columns, &names),
    });
    if folds >= 2 {
        let cv = repeated_stratified_cv(&bx, &y, folds, s.cv_repeats, s.seed, &s.cart, Execution::Parallel)?;
        out["folds"] = json!(folds);
        out["repeats"] = json!(s.cv_repeats);
        out["cv_error"] = json!(cv.error);
        out["repeat_errors"] = json!(cv.repeat_errors);
    }
    let hpo: Vec<usize> = (0..m.len()).filter(|&i| m.classes[i] == ProblemClass::Hpo).collect();
    if !hpo.is_empty() {
        let hx: Vec<Vec<f64>> = hpo.iter().map(|&i| m.rows[i].clone()).collect();
        // Dimensions absent from BBOB cannot be predicted and count as errors.
        let hy: Vec<usize> = hpo.iter().map(|&i| dims.binary_search(&m.dims[i]).unwrap_or(usize::MAX)).collect();
        let (error, pred) = holdout_error(&bx, &y, &hx, &hy, &s.cart)?;
        let predictions: Vec<Value> = hpo
            .iter()
            .zip(&pred)
            .map(|(&i, p)| json!({"problem_id": m.ids[i], "dim": m.dims[i], "predicted": dims[*p]}))
            .collect();
        out["hpo_holdout_error"] = json!(error);
        out["hpo_predictions"] = json!(predictions);
    }
    Ok(out)
}
