use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::archive::{self, cell_dir, is_complete, Job, Writer, METRICS_FILE};
use super::{Config, PipelineError};
use crate::data::{
    load_csv, random_split, scaffold_split, synth, Dataset, SplitAssignment, SplitKind,
    SPLIT_FRACTIONS,
};
use crate::estimators::{run_estimator, EstimatorId, EstimatorManifest, SplitContext};
use crate::eval::evaluate;

pub const TOOLKIT: &str = "uqmol";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub name: String,
    pub source: String,
    pub units: String,
    pub molecules: usize,
    /// SHA-256 of the records as `smiles,target` lines.
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub dataset: String,
    pub id: String,
    pub kind: SplitKind,
    pub seed: Option<u64>,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub degenerate: bool,
}

/// Benchmark constants in effect for a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub ensemble_size: usize,
    pub bootstrap_fraction: f64,
    pub snapshot_every: usize,
    pub snapshot_epochs: usize,
    pub dropout_rates: Vec<f64>,
    pub dropout_passes: usize,
    pub k_neighbors: usize,
    pub trees: usize,
    pub fp_length: usize,
    pub fp_radius: usize,
    pub split_fractions: [f64; 3],
    pub random_splits: usize,
    pub scaffold_splits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit: String,
    pub version: String,
    pub config_name: String,
    pub config_hash: String,
    pub seed: u64,
    pub datasets: Vec<DatasetRecord>,
    pub splits: Vec<SplitRecord>,
    pub estimators: Vec<String>,
    pub constants: Constants,
    pub created_unix: u64,
}

/// Per-cell provenance written next to the predictions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellManifest {
    pub toolkit: String,
    pub version: String,
    pub config_hash: String,
    pub run: EstimatorManifest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub dataset: String,
    pub split: String,
    pub estimator: String,
    pub error: String,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses the env override or the CPU count.
    pub workers: usize,
    /// Write the manifest and splits only.
    pub dry_run: bool,
    /// Extra dataset CSVs beyond those in the config.
    pub extra_datasets: Vec<PathBuf>,
}

#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub completed: usize,
    pub skipped: usize,
    pub failures: Vec<CellFailure>,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn dataset_hash(d: &Dataset) -> String {
    let mut h = Sha256::new();
    for r in d.records() {
        h.update(format!("{},{}\n", r.smiles, r.target).as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// A bundled dataset name, or a CSV path relative to `base`.
pub fn resolve_dataset(entry: &str, base: &Path) -> Result<Dataset, PipelineError> {
    if synth::BUNDLED_NAMES.contains(&entry) {
        return Ok(synth::bundled(entry)?);
    }
    let path = base.join(entry);
    if !path.is_file() {
        return Err(PipelineError::Config(format!(
            "dataset '{entry}' is neither a bundled name nor a file ({})",
            path.display()
        )));
    }
    let (d, report) = load_csv(&path)?;
    for r in &report.rejected {
        log::warn!("{}: line {} rejected: {}", path.display(), r.line, r.reason);
    }
    Ok(d)
}

fn worker_count(requested: usize) -> usize {
    if requested > 0 {
        return requested;
    }
    std::env::var(super::WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serialises");
    s.push('\n');
    s.into_bytes()
}

/// Run every (dataset, split, estimator) cell of `config` into `out`,
/// skipping cells that are already complete.
///
/// Cell failures are recorded and do not stop the run. An archive created
/// with a different config hash is refused.
pub fn run(
    config: &Config,
    config_dir: &Path,
    out: &Path,
    opts: &RunOptions,
) -> Result<RunSummary, PipelineError> {
    config.validate()?;
    let roster = config.roster()?;
    let hash = config.hash();

    let mut datasets = Vec::new();
    let mut sources = config.data.datasets.clone();
    sources.extend(opts.extra_datasets.iter().map(|p| p.display().to_string()));
    if sources.is_empty() {
        return Err(PipelineError::Config("no datasets configured".into()));
    }
    for entry in &sources {
        let mut d = resolve_dataset(entry, config_dir)?;
        if config.data.max_molecules > 0 && d.len() > config.data.max_molecules {
            d = d.truncated(config.data.max_molecules);
        }
        if datasets
            .iter()
            .any(|(x, _): &(Dataset, String)| x.name() == d.name())
        {
            return Err(PipelineError::Config(format!(
                "dataset name '{}' used twice",
                d.name()
            )));
        }
        datasets.push((d, entry.clone()));
    }

    let mut splits: Vec<(usize, SplitAssignment)> = Vec::new();
    for (di, (d, _)) in datasets.iter().enumerate() {
        for i in 0..config.data.random_splits {
            splits.push((di, random_split(d, config.data.split_seed + i as u64)?));
        }
        if config.data.scaffold_split {
            splits.push((di, scaffold_split(d)?));
        }
    }

    let settings = config.settings();
    let manifest = RunManifest {
        toolkit: TOOLKIT.into(),
        version: VERSION.into(),
        config_name: config.name.clone(),
        config_hash: hash.clone(),
        seed: config.seed,
        datasets: datasets
            .iter()
            .map(|(d, source)| DatasetRecord {
                name: d.name().into(),
                source: source.clone(),
                units: d.units().into(),
                molecules: d.len(),
                sha256: dataset_hash(d),
            })
            .collect(),
        splits: splits
            .iter()
            .map(|(di, s)| SplitRecord {
                dataset: datasets[*di].0.name().into(),
                id: s.id(),
                kind: s.kind,
                seed: (s.kind == SplitKind::Random).then_some(s.seed),
                train: s.train.len(),
                validation: s.validation.len(),
                test: s.test.len(),
                degenerate: s.is_degenerate(),
            })
            .collect(),
        estimators: roster.iter().map(|r| r.to_string()).collect(),
        constants: Constants {
            ensemble_size: settings.ensemble_size,
            bootstrap_fraction: settings.bootstrap_fraction,
            snapshot_every: settings.snapshot_every,
            snapshot_epochs: settings.snapshot_every * settings.ensemble_size,
            dropout_rates: settings.dropout_rates.clone(),
            dropout_passes: settings.dropout_passes,
            k_neighbors: settings.k_neighbors,
            trees: settings.forest.trees,
            fp_length: settings.net.fp_length,
            fp_radius: settings.net.fp_radius,
            split_fractions: SPLIT_FRACTIONS,
            random_splits: config.data.random_splits,
            scaffold_splits: usize::from(config.data.scaffold_split),
        },
        created_unix: now(),
    };

    std::fs::create_dir_all(out).map_err(|e| PipelineError::io(out, e))?;
    let manifest_path = out.join("manifest.json");
    if manifest_path.exists() {
        let text = std::fs::read_to_string(&manifest_path)
            .map_err(|e| PipelineError::io(&manifest_path, e))?;
        let old: RunManifest = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Archive(format!("{}: {e}", manifest_path.display())))?;
        if old.config_hash != hash {
            return Err(PipelineError::ConfigMismatch {
                expected: hash,
                found: old.config_hash,
            });
        }
        let same = RunManifest {
            created_unix: old.created_unix,
            ..manifest.clone()
        };
        if old != same {
            return Err(PipelineError::Archive(
                "archive manifest differs from this run (datasets changed?)".into(),
            ));
        }
    } else {
        archive::write_or_verify(&manifest_path, &json(&manifest))?;
        archive::write_or_verify(&out.join("config.toml"), config.to_toml().as_bytes())?;
    }
    for (di, s) in &splits {
        let path = out
            .join(datasets[*di].0.name())
            .join("splits")
            .join(format!("{}.json", s.id()));
        archive::write_or_verify(&path, format!("{}\n", s.to_json()).as_bytes())?;
    }

    let mut summary = RunSummary::default();
    if opts.dry_run {
        return Ok(summary);
    }
    let started = now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(opts.workers))
        .build()
        .map_err(|e| PipelineError::Archive(format!("thread pool: {e}")))?;
    let writer = Writer::spawn();
    let failures_path = out.join("failures.jsonl");

    for (di, split) in &splits {
        let d = &datasets[*di].0;
        let sid = split.id();
        let mut todo: Vec<EstimatorId> = Vec::new();
        for &id in &roster {
            let dir = cell_dir(out, d.name(), &sid, &id.to_string());
            if is_complete(&dir) {
                summary.skipped += 1;
            } else {
                archive::clear_partial(&dir)?;
                todo.push(id);
            }
        }
        if todo.is_empty() {
            continue;
        }
        log::info!("{} / {sid}: {} cells", d.name(), todo.len());
        let ctx = match SplitContext::new(d, split.clone(), settings.clone(), config.seed) {
            Ok(c) => c,
            Err(e) => {
                for id in todo {
                    summary.failures.push(CellFailure {
                        dataset: d.name().into(),
                        split: sid.clone(),
                        estimator: id.to_string(),
                        error: e.to_string(),
                    });
                }
                continue;
            }
        };
        let tx = writer.sender();
        let results: Vec<Result<(), CellFailure>> = pool.install(|| {
            todo.par_iter()
                .map(|&id| {
                    let fail = |error: String| CellFailure {
                        dataset: d.name().into(),
                        split: sid.clone(),
                        estimator: id.to_string(),
                        error,
                    };
                    let run = run_estimator(&ctx, id).map_err(|e| fail(e.to_string()))?;
                    let report = evaluate(d.name(), &run.test, &run.validation);
                    let cell = CellManifest {
                        toolkit: TOOLKIT.into(),
                        version: VERSION.into(),
                        config_hash: hash.clone(),
                        run: run.manifest,
                    };
                    let files = vec![
                        ("predictions.csv", run.test.to_csv().into_bytes()),
                        ("validation.csv", run.validation.to_csv().into_bytes()),
                        ("manifest.json", json(&cell)),
                        (METRICS_FILE, report.to_json().into_bytes()),
                    ];
                    tx.send(Job::Cell {
                        dir: cell_dir(out, d.name(), &sid, &id.to_string()),
                        files,
                    })
                    .map_err(|e| fail(format!("writer gone: {e}")))?;
                    log::info!("{} / {sid} / {id} done", d.name());
                    Ok(())
                })
                .collect()
        });
        for r in results {
            match r {
                Ok(()) => summary.completed += 1,
                Err(f) => {
                    log::error!("{} / {} / {}: {}", f.dataset, f.split, f.estimator, f.error);
                    summary.failures.push(f);
                }
            }
        }
    }

    let tx = writer.sender();
    for f in &summary.failures {
        let _ = tx.send(Job::Append {
            path: failures_path.clone(),
            line: serde_json::to_string(f).expect("serialises"),
        });
    }
    let line = serde_json::json!({
        "started_unix": started,
        "finished_unix": now(),
        "config_hash": hash,
        "completed": summary.completed,
        "skipped": summary.skipped,
        "failed": summary.failures.len(),
    });
    let _ = tx.send(Job::Append {
        path: out.join("invocations.jsonl"),
        line: line.to_string(),
    });
    drop(tx);
    let errors = writer.finish();
    if !errors.is_empty() {
        return Err(PipelineError::Archive(format!(
            "archive writes failed: {}",
            errors.join("; ")
        )));
    }
    Ok(summary)
}
