//! Dense and message-passing regressors with hand-written gradients.
//!
//! Two base architectures share one dense head:
//!
//! * **MPNN**: atom-centred message passing. `h0 = relu(W_in x_v + b_in)`,
//!   then for each step `h_v = relu(h0_v + W_m sum_{u in N(v)} h_u + b_m)`,
//!   followed by a mean (default) or sum readout over atoms.
//! * **FFN**: a sparse first layer over fingerprint on-bits.
//!
//! The readout (or first FFN layer) feeds a stack of ReLU dense layers and
//! a linear output. The last dense activation is the molecule embedding.
//! Inverted dropout is applied to the input of every dense layer after the
//! first FFN layer and to the output layer input.

mod checkpoint;
mod features;
mod model;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use features::{featurize, featurize_all, GraphInput, Input, ATOM_FEATURES};
pub use model::{inverse_softplus, mve_loss, softplus, Output, TrainedModel};
pub use train::{train, Schedule, TrainConfig, TrainOutcome, TrainingLog};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Featurizer {
    /// Message passing over the molecular graph.
    Graph,
    /// Dense network over a circular fingerprint.
    Fingerprint,
}

impl Featurizer {
    pub fn name(self) -> &'static str {
        match self {
            Featurizer::Graph => "mpnn",
            Featurizer::Fingerprint => "ffn",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Head {
    Scalar,
    MeanVariance,
}

/// How atom states are pooled into the molecule vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Readout {
    Sum,
    #[default]
    Mean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub featurizer: Featurizer,
    pub hidden: usize,
    /// Message passing steps (graph featurizer only).
    pub depth: usize,
    pub readout: Readout,
    /// ReLU dense layers between the readout and the output layer.
    pub dense_layers: usize,
    pub dropout: f64,
    pub head: Head,
    /// Added to the softplus output of the mean-variance head.
    pub variance_floor: f64,
    pub fp_length: usize,
    pub fp_radius: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            featurizer: Featurizer::Graph,
            hidden: 300,
            depth: 3,
            readout: Readout::Mean,
            dense_layers: 2,
            dropout: 0.0,
            head: Head::Scalar,
            variance_floor: 1e-6,
            fp_length: crate::chem::DEFAULT_LENGTH,
            fp_radius: crate::chem::DEFAULT_RADIUS,
        }
    }
}

impl NetConfig {
    pub fn validate(&self) -> Result<(), NnetError> {
        let bad = |m: String| Err(NnetError::InvalidConfig(m));
        if self.hidden == 0 {
            return bad("hidden size must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if self.featurizer == Featurizer::Fingerprint && self.dense_layers == 0 {
            return bad("fingerprint networks need at least one dense layer".into());
        }
        if self.fp_length < 8 {
            return bad(format!("fingerprint length {} below 8", self.fp_length));
        }
        if !(self.variance_floor >= 0.0) {
            return bad("variance floor must be non-negative".into());
        }
        Ok(())
    }

    pub fn outputs(&self) -> usize {
        match self.head {
            Head::Scalar => 1,
            Head::MeanVariance => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NnetError {
    #[error("model expects {expected} input but got {got}")]
    InputMismatch {
        expected: &'static str,
        got: &'static str,
    },
    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),
    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Divergence { epoch: usize, loss: f64 },
    #[error("{0} set is empty")]
    EmptyData(&'static str),
    #[error("invalid network config: {0}")]
    InvalidConfig(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Chem(#[from] crate::chem::ChemError),
}
