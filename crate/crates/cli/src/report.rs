//! Human-readable rendering of a report bundle: a Markdown summary and,
//! optionally, an SVG scatter of the component scores.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::analyze::REPORT_DIR;
use crate::store::write_atomic;
use crate::CliError;

fn read(dir: &Path, name: &str) -> Option<String> {
    std::fs::read_to_string(dir.join(name)).ok()
}

fn read_json(dir: &Path, name: &str) -> Result<Option<Value>, CliError> {
    read(dir, name)
        .map(|t| serde_json::from_str(&t).map_err(|e| CliError::Schema(format!("{name}: {e}"))))
        .transpose()
}

/// Renders `summary.md` (and `pca.svg` with `svg`) into the store's report
/// directory. Returns the written paths.
pub fn cmd_report(store_dir: &Path, svg: bool) -> Result<Vec<PathBuf>, CliError> {
    let dir = store_dir.join(REPORT_DIR);
    let bundle = read_json(&dir, "bundle.json")?
        .ok_or_else(|| CliError::Schema(format!("{} holds no report bundle; run analyze first", dir.display())))?;
    if bundle["schema_version"] != crate::SCHEMA_VERSION {
        return Err(CliError::Schema(format!("bundle schema version {}", bundle["schema_version"])));
    }
    let mut md = String::from("# Benchmark and landscape report\n\n");

    if let Some(f) = read_json(&dir, "friedman.json")? {
        md.push_str("## Optimizer ranks\n\n| scope | problems | chi² | df | p | CD (0.05) | mean ranks |\n|---|---|---|---|---|---|---|\n");
        for t in f["tests"].as_array().into_iter().flatten() {
            let ranks: Vec<String> = t["mean_ranks"]
                .as_object()
                .into_iter()
                .flatten()
                .map(|(o, r)| format!("{o} {:.2}", r.as_f64().unwrap_or(f64::NAN)))
                .collect();
            writeln!(
                md,
                "| {} | {} | {:.2} | {} | {:.3e} | {} | {} |",
                t["scope"].as_str().unwrap_or(""),
                t["problems"],
                t["statistic"].as_f64().unwrap_or(f64::NAN),
                t["df"],
                t["p_value"].as_f64().unwrap_or(f64::NAN),
                t["critical_difference_0.05"].as_f64().map_or("n/a".into(), |v| format!("{v:.3}")),
                ranks.join(", ")
            )
            .unwrap();
        }
        md.push('\n');
    }
    for (title, file) in [("ERT ratios", "ert_summary.csv"), ("Final normalized regret", "regret_summary.csv")] {
        if let Some(csv) = read(&dir, file) {
            let mut lines = csv.lines();
            let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
            writeln!(md, "## {title}\n\n| {} |\n|{}", header.join(" | "), "---|".repeat(header.len())).unwrap();
            for l in lines {
                writeln!(md, "| {} |", l.split(',').collect::<Vec<_>>().join(" | ")).unwrap();
            }
            md.push('\n');
        }
    }
    if let Some(l) = read_json(&dir, "landscape.json")? {
        md.push_str("## Landscape analysis\n\n");
        if let Some(r) = l["pca"]["explained_variance_ratio"].as_array() {
            let total: f64 = r.iter().filter_map(Value::as_f64).sum();
            writeln!(md, "- Two principal components explain {:.1}% of the variance.", 100.0 * total).unwrap();
        }
        if let Some(k) = l["kmeans"]["best_k"].as_u64() {
            writeln!(md, "- Silhouette analysis selects k = {k}.").unwrap();
        }
    }
    if let Some(c) = read_json(&dir, "classification.json")? {
        for (task, label) in [("hpo_vs_bbob", "HPO vs BBOB"), ("dimensionality", "Dimensionality")] {
            if let Some(e) = c[task]["cv_error"].as_f64() {
                writeln!(md, "- {label} classifier: cross-validated error {:.2}%.", 100.0 * e).unwrap();
            }
        }
        if let Some(e) = c["dimensionality"]["hpo_holdout_error"].as_f64() {
            writeln!(md, "- Dimensionality classifier on HPO problems: holdout error {:.2}%.", 100.0 * e).unwrap();
        }
    }
    if let Some(csv) = read(&dir, "nearest_bbob.csv") {
        md.push_str("\n## Nearest BBOB problem\n\n| HPO problem | BBOB problem | distance |\n|---|---|---|\n");
        for l in csv.lines().skip(1) {
            writeln!(md, "| {} |", l.split(',').collect::<Vec<_>>().join(" | ")).unwrap();
        }
    }
    let mut written = vec![dir.join("summary.md")];
    write_atomic(&written[0], md.as_bytes())?;
    if svg {
        if let Some(csv) = read(&dir, "pca_scores.csv") {
            let path = dir.join("pca.svg");
            write_atomic(&path, scatter_svg(&csv).as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}

const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

fn scatter_svg(csv: &str) -> String {
    let rows: Vec<(bool, f64, f64, usize)> = csv
        .lines()
        .skip(1)
        .filter_map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Some((f[1] == "hpo", f[3].parse().ok()?, f[4].parse().ok()?, f[5].parse().unwrap_or(1)))
        })
        .collect();
    let (w, h, pad) = (640.0, 480.0, 40.0);
    let ext = |sel: fn(&(bool, f64, f64, usize)) -> f64| {
        let lo = rows.iter().map(sel).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(sel).fold(f64::NEG_INFINITY, f64::max);
        (lo, (hi - lo).max(1e-12))
    };
    let (x0, xs) = ext(|r| r.1);
    let (y0, ys) = ext(|r| r.2);
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n");
    writeln!(s, "<text x=\"{}\" y=\"{}\" font-size=\"12\">PC1</text>", w / 2.0, h - 8.0).unwrap();
    writeln!(s, "<text x=\"4\" y=\"{}\" font-size=\"12\">PC2</text>", h / 2.0).unwrap();
    for (hpo, x, y, c) in &rows {
        let px = pad + (x - x0) / xs * (w - 2.0 * pad);
        let py = h - pad - (y - y0) / ys * (h - 2.0 * pad);
        let colour = PALETTE[(c + PALETTE.len() - 1) % PALETTE.len()];
        if *hpo {
            writeln!(s, "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"8\" height=\"8\" fill=\"{colour}\" stroke=\"black\"/>", px - 4.0, py - 4.0).unwrap();
        } else {
            writeln!(s, "<circle cx=\"{px:.1}\" cy=\"{py:.1}\" r=\"3\" fill=\"{colour}\"/>").unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}
