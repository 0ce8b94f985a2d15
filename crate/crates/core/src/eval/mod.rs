//! Uncertainty metrics: rank correlation, miscalibration area, NLL and its
//! ideal baseline, calibrated NLL, and RMSE retention curves.

mod calibration;
mod metrics;
mod report;

use thiserror::Error;

pub use calibration::{
    calibration_nll, capped_slope, cnll, fit_calibration, CalibrationParams, MIN_CALIBRATION,
    VARIANCE_FLOOR,
};
pub use metrics::{
    average_ranks, calibration_curve, ideal_nll, miscalibration_area, nll, retention_curve,
    spearman_rho, CONFIDENCE_LEVELS, MIN_RETENTION, RESIDUAL_CLAMP, RETENTION_FRACTIONS,
};
pub use report::{evaluate, Metric, MetricReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {min} points, got {n}")]
    TooFew { n: usize, min: usize },
    #[error("undefined: {0}")]
    Undefined(&'static str),
    #[error("uncertainty at index {index} is {value}, must be positive")]
    NonPositiveUncertainty { index: usize, value: f64 },
    #[error("metric requires variance-like uncertainties")]
    RelativeSemantics,
    #[error("no feasible calibration start")]
    Infeasible,
}
