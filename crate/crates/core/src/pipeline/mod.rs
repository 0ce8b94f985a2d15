//! End-to-end experiment orchestration: config, run archive, reports and
//! estimator comparisons.
//!
//! Archive layout:
//!
//! ```text
//! <out>/manifest.json                       run manifest, written once
//! <out>/config.toml                         resolved config
//! <out>/invocations.jsonl                   one line per run invocation
//! <out>/failures.jsonl                      one line per failed cell
//! <out>/<dataset>/splits/<split>.json       split assignments
//! <out>/<dataset>/<split>/<estimator>/
//!     predictions.csv  validation.csv  manifest.json  metrics.json
//! <out>/report/...                          written by `report`
//! <out>/compare/...                         written by `compare`
//! ```
//!
//! A cell is complete once its `metrics.json` exists; it is always written
//! last.

mod archive;
mod config;
mod report;
mod run;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{Config, DataConfig, EstimatorConfig, ModelConfig, TrainingConfig};
pub use report::{compare, load_reports, quartiles, report};
pub use run::{
    resolve_dataset, run, CellFailure, CellManifest, Constants, DatasetRecord, RunManifest,
    RunOptions, RunSummary, SplitRecord,
};

/// Worker-count override for `run`.
pub const WORKERS_ENV: &str = "UQMOL_WORKERS";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("archive was created with config {found}, current config is {expected}")]
    ConfigMismatch { expected: String, found: String },
    #[error("{0}")]
    Archive(String),
    #[error("no metric reports in {0}")]
    EmptyArchive(PathBuf),
    #[error("dataset: {0}")]
    Data(#[from] crate::data::DataError),
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> PipelineError {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(
            self,
            PipelineError::Config(_) | PipelineError::ConfigMismatch { .. }
        )
    }
}
