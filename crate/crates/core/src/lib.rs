//! Uncertainty quantification benchmark for molecular property regression.
//!
//! The crate bundles everything needed to train and score uncertainty
//! estimators on small-molecule regression tasks:
//!
//! * [`chem`]: SMILES parsing, circular fingerprints, Murcko scaffolds and a
//!   heuristic logP target.
//! * [`data`]: dataset ingestion, random and scaffold splits, target scaling.
//! * [`nnet`]: fingerprint feed-forward and message passing regressors with
//!   hand-written reverse-mode gradients, dropout and a mean-variance head.
//! * [`shallow`]: exact linear-kernel Gaussian process and random forest.
//! * [`estimators`]: the uncertainty estimators built from the pieces above.
//! * [`eval`]: ranking, calibration and likelihood metrics.
//! * [`stats`]: signed-rank z-scores for pairwise estimator comparison.
//! * [`pipeline`]: the experiment runner behind the `uqmol` command line tool.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chem;
pub mod data;
pub mod estimators;
pub mod eval;
pub mod nnet;
pub mod pipeline;
pub mod seed;
pub mod shallow;
pub mod stats;

/// Version string recorded in run manifests and checkpoints.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
