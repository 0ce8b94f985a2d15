//! Exact linear-kernel Gaussian process and random forest regressors.

mod forest;
mod gp;
mod linalg;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use forest::{Forest, ForestParams, DEFAULT_TREES, MIN_LEAF};
pub use gp::{GpParams, LinearFeatures, LinearGP};
pub use linalg::{cholesky, solve_lower, solve_upper_transposed};

/// Predictive mean and variance at one query.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShallowError {
    #[error("need at least {min} training rows, got {n}")]
    TooFewRows { n: usize, min: usize },
    #[error("{inputs} input rows but {targets} targets")]
    LengthMismatch { inputs: usize, targets: usize },
    #[error("non-finite value in training data")]
    NonFinite,
    #[error("query has dimension {got}, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(
        "kernel matrix is not positive definite (pivot {pivot}); noise variance may be too small"
    )]
    Singular { pivot: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
