use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hpoela_cli::analyze::cmd_analyze;
use hpoela_cli::bench::cmd_bench;
use hpoela_cli::features::cmd_features;
use hpoela_cli::report::cmd_report;
use hpoela_cli::{CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "hpoela", version, about = "Benchmark black-box optimizers and compare problem landscapes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (problem, optimizer, replication) cell of a campaign.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (0 = one per core); overrides the config and environment.
        #[arg(long)]
        workers: Option<usize>,
        /// Continue an existing store, skipping completed cells.
        #[arg(long)]
        resume: bool,
    },
    /// Compute landscape features for every configured problem.
    Features {
        #[arg(long)]
        config: PathBuf,
    },
    /// Build the report bundle from a store and a feature matrix.
    Analyze {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a Markdown summary of the report bundle.
    Report {
        #[arg(long)]
        store: PathBuf,
        /// Also draw the component-score scatter as SVG.
        #[arg(long)]
        svg: bool,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Bench { config, workers, resume } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let (summary, store) = cmd_bench(&cfg, resume)?;
            println!(
                "{} cells: {} completed now, {} already done, {} failed ({} evaluations) in {}",
                summary.cells,
                summary.completed,
                summary.skipped,
                summary.failed.len(),
                summary.evaluations,
                store.root().display()
            );
            for f in &summary.failed {
                eprintln!("failed: {f}");
            }
            Ok(summary.exit_code())
        }
        Command::Features { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let s = cmd_features(&cfg)?;
            println!("{} problems -> {} ({} excluded)", s.matrix.len(), s.path.display(), s.excluded.len());
            Ok(0)
        }
        Command::Analyze { store, features, out } => {
            let s = cmd_analyze(&store, &features, out.as_deref())?;
            println!("wrote {} files to {}", s.files.len(), s.out_dir.display());
            Ok(0)
        }
        Command::Report { store, svg } => {
            for p in cmd_report(&store, svg)? {
                println!("{}", p.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
