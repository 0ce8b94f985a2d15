use serde::{Deserialize, Serialize};

use super::DataError;

/// Target standardisation fitted on training targets only.
///
/// Uses the population standard deviation (divide by `n`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: f64,
    pub std: f64,
}

impl Scaler {
    pub fn fit(targets: &[f64]) -> Result<Scaler, DataError> {
        if targets.is_empty() {
            return Err(DataError::Empty);
        }
        let n = targets.len() as f64;
        let mean = targets.iter().sum::<f64>() / n;
        let var = targets.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        if !(std > 0.0) || !std.is_finite() {
            return Err(DataError::ZeroVariance);
        }
        Ok(Scaler { mean, std })
    }

    pub fn identity() -> Scaler {
        Scaler {
            mean: 0.0,
            std: 1.0,
        }
    }

    pub fn transform(&self, y: f64) -> f64 {
        (y - self.mean) / self.std
    }

    pub fn inverse(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }

    /// Map a variance in scaled units back to original units.
    pub fn inverse_variance(&self, v: f64) -> f64 {
        v * self.std * self.std
    }
}
