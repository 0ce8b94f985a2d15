//! Datasets, splitting protocols and target scaling.

mod dataset;
mod scaler;
mod split;
pub mod synth;

use thiserror::Error;

use crate::chem::ChemError;

pub use dataset::{generate_clogp_dataset, load_csv, Dataset, LoadReport, Record, Rejection};
pub use scaler::Scaler;
pub use split::{
    random_split, scaffold_split, scaffold_split_from_keys, SplitAssignment, SplitKind,
    SPLIT_FRACTIONS,
};

/// Smallest dataset accepted by the splitters.
pub const MIN_SPLIT_SIZE: usize = 10;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("unknown bundled dataset '{0}'")]
    UnknownDataset(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column '{0}'")]
    MissingColumn(&'static str),
    #[error("line {line}: target '{value}' is not a number")]
    NonNumericTarget { line: u64, value: String },
    #[error("line {line}: target is not finite")]
    NonFiniteTarget { line: u64 },
    #[error("dataset is empty")]
    Empty,
    #[error("dataset has {n} records, at least {min} are required")]
    TooSmall { n: usize, min: usize },
    #[error("duplicate SMILES '{0}'")]
    DuplicateSmiles(String),
    #[error("targets have zero variance")]
    ZeroVariance,
    #[error("record {index}: {source}")]
    Chem { index: usize, source: ChemError },
}
