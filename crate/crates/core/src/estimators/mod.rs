//! The uncertainty estimators: ensembles, MC dropout, mean-variance
//! networks, distance scores, union tails and fingerprint baselines.
//!
//! All models train on train-scaled targets; predictions and variance-like
//! uncertainties are returned in original units.

mod context;
mod id;
mod prediction;
mod run;

use thiserror::Error;

pub use context::{Settings, SplitContext};
pub use id::{roster, EstimatorId, Method};
pub use prediction::{PredictionSet, Semantics};
pub use run::{
    bootstrap_subsets, ensemble_predict, knn_mean, run_estimator, EstimatorManifest, EstimatorRun,
    MIN_TAIL_ROWS,
};

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("prediction vectors are not aligned")]
    Misaligned,
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("negative uncertainty at index {index}")]
    NegativeUncertainty { index: usize },
    #[error("io: {0}")]
    Io(String),
    #[error("invalid estimator settings: {0}")]
    InvalidConfig(String),
    #[error("{0} part of the split is empty")]
    EmptyPart(&'static str),
    #[error("featurization failed: {0}")]
    Featurize(String),
    #[error("base model training failed: {0}")]
    BaseModel(String),
    #[error("ensemble member {member} failed: {message}")]
    Member { member: usize, message: String },
    #[error("degenerate ensemble: {0}")]
    Degenerate(String),
    #[error("k = {k} exceeds the {n} training molecules")]
    TooFewNeighbors { k: usize, n: usize },
    #[error("tail model needs at least {min} validation rows, got {n}")]
    TooFewTailRows { n: usize, min: usize },
    #[error(transparent)]
    Nnet(#[from] crate::nnet::NnetError),
    #[error(transparent)]
    Shallow(#[from] crate::shallow::ShallowError),
    #[error(transparent)]
    Chem(#[from] crate::chem::ChemError),
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
}
