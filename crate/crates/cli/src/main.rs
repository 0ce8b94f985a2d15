use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use uqmol::eval::Metric;
use uqmol::pipeline::{self, Config, RunOptions, WORKERS_ENV};
use uqmol::stats::Aggregation;

/// Uncertainty quantification benchmark for molecular property regression.
#[derive(Parser)]
#[command(name = "uqmol", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every dataset x split x estimator cell of a config into an archive.
    Run {
        /// TOML config; omitted keys take the full-scale defaults.
        #[arg(long, short)]
        config: PathBuf,
        /// Archive directory. Completed cells are skipped on rerun.
        #[arg(long, short)]
        out: PathBuf,
        /// Extra dataset CSV (smiles,target), in addition to the config list.
        #[arg(long = "dataset", value_name = "CSV")]
        datasets: Vec<PathBuf>,
        /// Worker threads; 0 uses the environment override or all cores.
        #[arg(long, short, default_value_t = 0, env = WORKERS_ENV)]
        workers: usize,
        /// Write the manifest and splits without training anything.
        #[arg(long)]
        dry_run: bool,
    },
    /// Write summary tables and plot-ready TSVs under <archive>/report.
    Report { archive: PathBuf },
    /// Pairwise signed-rank comparison of all estimators on one metric.
    Compare {
        archive: PathBuf,
        #[arg(long, short, default_value = "spearman")]
        metric: Metric,
        /// per-split or median
        #[arg(long, short, default_value = "per-split")]
        aggregation: Aggregation,
    },
    /// Check a config and print it with every default filled in.
    ValidateConfig { config: PathBuf },
}

fn load(path: &Path) -> Result<Config> {
    let config = Config::load(path).with_context(|| format!("loading {}", path.display()))?;
    config.validate()?;
    config.roster()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            out,
            datasets,
            workers,
            dry_run,
        } => {
            let cfg = load(&config)?;
            let base = config.parent().unwrap_or(Path::new("."));
            let opts = RunOptions {
                workers,
                dry_run,
                extra_datasets: datasets,
            };
            let summary = pipeline::run(&cfg, base, &out, &opts)?;
            println!(
                "{} completed, {} skipped, {} failed",
                summary.completed,
                summary.skipped,
                summary.failures.len()
            );
            if !summary.failures.is_empty() {
                for f in &summary.failures {
                    eprintln!(
                        "failed: {} / {} / {}: {}",
                        f.dataset, f.split, f.estimator, f.error
                    );
                }
                return Ok(ExitCode::from(2));
            }
        }
        Command::Report { archive } => {
            for p in pipeline::report(&archive)? {
                println!("{}", p.display());
            }
        }
        Command::Compare {
            archive,
            metric,
            aggregation,
        } => {
            let (_, files) = pipeline::compare(&archive, metric, aggregation)?;
            for p in files {
                println!("{}", p.display());
            }
        }
        Command::ValidateConfig { config } => {
            let cfg = load(&config)?;
            print!("{}", cfg.to_toml());
            eprintln!("ok: config hash {}", cfg.hash());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    // Usage errors are config errors; 2 is reserved for failed cells.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
