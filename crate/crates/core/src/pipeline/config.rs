use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::estimators::{roster, EstimatorId, Settings};
use crate::nnet::{NetConfig, Readout, Schedule, TrainConfig};
use crate::shallow::{ForestParams, GpParams};

/// A run configuration. Every field has a default, and the defaults are the
/// full-scale benchmark constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub name: String,
    /// Master seed for model initialisation, training and sampling.
    pub seed: u64,
    pub data: DataConfig,
    pub model: ModelConfig,
    pub training: TrainingConfig,
    pub estimators: EstimatorConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Bundled dataset names or CSV paths (relative to the config file).
    pub datasets: Vec<String>,
    /// Keep only the first this many molecules of each dataset; 0 keeps all.
    pub max_molecules: usize,
    pub random_splits: usize,
    /// Random split `i` uses seed `split_seed + i`.
    pub split_seed: u64,
    pub scaffold_split: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub hidden: usize,
    pub depth: usize,
    /// Atom pooling for message passing networks: "mean" or "sum".
    pub readout: Readout,
    pub dense_layers: usize,
    pub fp_length: usize,
    pub fp_radius: usize,
    pub variance_floor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub init_lr: f64,
    pub max_lr: f64,
    pub final_lr: f64,
    pub warmup_epochs: usize,
    /// Early-stopping patience in epochs; 0 disables early stopping.
    pub patience: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Estimator ids to run; empty runs the full roster.
    pub roster: Vec<String>,
    pub ensemble_size: usize,
    pub bootstrap_fraction: f64,
    pub snapshot_every: usize,
    pub dropout_rates: Vec<f64>,
    pub dropout_passes: usize,
    pub k_neighbors: usize,
    pub trees: usize,
    pub min_leaf: usize,
    pub gp_prior_variance: f64,
    pub gp_noise: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            name: "full".into(),
            seed: 0,
            data: DataConfig::default(),
            model: ModelConfig::default(),
            training: TrainingConfig::default(),
            estimators: EstimatorConfig::default(),
        }
    }
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            datasets: crate::data::synth::BUNDLED_NAMES
                .iter()
                .map(|s| s.to_string())
                .collect(),
            max_molecules: 0,
            random_splits: 8,
            split_seed: 0,
            scaffold_split: true,
        }
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        let n = NetConfig::default();
        ModelConfig {
            hidden: n.hidden,
            depth: n.depth,
            readout: n.readout,
            dense_layers: n.dense_layers,
            fp_length: n.fp_length,
            fp_radius: n.fp_radius,
            variance_floor: n.variance_floor,
        }
    }
}

impl Default for TrainingConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainingConfig {
            epochs: t.epochs,
            batch_size: t.batch_size,
            init_lr: t.schedule.init_lr,
            max_lr: t.schedule.max_lr,
            final_lr: t.schedule.final_lr,
            warmup_epochs: t.schedule.warmup_epochs,
            patience: t.patience.unwrap_or(0),
        }
    }
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        let s = Settings::default();
        EstimatorConfig {
            roster: Vec::new(),
            ensemble_size: s.ensemble_size,
            bootstrap_fraction: s.bootstrap_fraction,
            snapshot_every: s.snapshot_every,
            dropout_rates: s.dropout_rates,
            dropout_passes: s.dropout_passes,
            k_neighbors: s.k_neighbors,
            trees: s.forest.trees,
            min_leaf: s.forest.min_leaf,
            gp_prior_variance: s.gp.prior_variance,
            gp_noise: s.gp.noise,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config, PipelineError> {
        let c: Config = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Config, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Config::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// SHA-256 over the canonical JSON form of the resolved config.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn settings(&self) -> Settings {
        let m = &self.model;
        let t = &self.training;
        let e = &self.estimators;
        Settings {
            net: NetConfig {
                hidden: m.hidden,
                depth: m.depth,
                readout: m.readout,
                dense_layers: m.dense_layers,
                fp_length: m.fp_length,
                fp_radius: m.fp_radius,
                variance_floor: m.variance_floor,
                ..NetConfig::default()
            },
            train: TrainConfig {
                epochs: t.epochs,
                batch_size: t.batch_size,
                schedule: Schedule {
                    init_lr: t.init_lr,
                    max_lr: t.max_lr,
                    final_lr: t.final_lr,
                    warmup_epochs: t.warmup_epochs,
                },
                patience: (t.patience > 0).then_some(t.patience),
                snapshot_every: None,
            },
            ensemble_size: e.ensemble_size,
            bootstrap_fraction: e.bootstrap_fraction,
            snapshot_every: e.snapshot_every,
            dropout_rates: e.dropout_rates.clone(),
            dropout_passes: e.dropout_passes,
            k_neighbors: e.k_neighbors,
            forest: ForestParams {
                trees: e.trees,
                min_leaf: e.min_leaf,
                max_features: None,
            },
            gp: GpParams {
                prior_variance: e.gp_prior_variance,
                noise: e.gp_noise,
            },
        }
    }

    /// The estimator ids to run, in roster order.
    pub fn roster(&self) -> Result<Vec<EstimatorId>, PipelineError> {
        let full = roster(&self.estimators.dropout_rates);
        if self.estimators.roster.is_empty() {
            return Ok(full);
        }
        let mut out = Vec::new();
        for name in &self.estimators.roster {
            let id: EstimatorId = name.parse().map_err(PipelineError::Config)?;
            if !full.contains(&id) {
                return Err(PipelineError::Config(format!(
                    "{id} is not in the roster for dropout rates {:?}",
                    self.estimators.dropout_rates
                )));
            }
            if out.contains(&id) {
                return Err(PipelineError::Config(format!("{id} listed twice")));
            }
            out.push(id);
        }
        // Keep the canonical order regardless of listing order.
        out.sort_by_key(|id| full.iter().position(|f| f == id));
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.data.random_splits == 0 && !self.data.scaffold_split {
            return bad("no splits configured".into());
        }
        if self.training.warmup_epochs > self.training.epochs {
            return bad("warmup is longer than training".into());
        }
        if let Some(d) = self.data.datasets.iter().find(|d| d.is_empty()) {
            return bad(format!("empty dataset entry '{d}'"));
        }
        self.settings()
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        self.roster()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_benchmark_constants() {
        let c = Config::default();
        let s = c.settings();
        assert_eq!(s, Settings::default());
        assert_eq!(c.roster().unwrap().len(), 22);
        assert_eq!(c.data.random_splits, 8);
        assert!(c.data.scaffold_split);
    }

    #[test]
    fn partial_files_fill_defaults_and_reject_unknown_keys() {
        let c = Config::from_toml("seed = 3\n[training]\nepochs = 5\n").unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.training.epochs, 5);
        assert_eq!(c.estimators.ensemble_size, 16);
        assert!(Config::from_toml("[training]\nepoch = 5\n").is_err());
        assert!(Config::from_toml("[estimators]\nensemble_size = 1\n").is_err());
        assert!(Config::from_toml("[estimators]\nroster = [\"ffn-dropout-30\"]\n").is_err());
    }

    #[test]
    fn hash_tracks_every_field_and_round_trips() {
        let a = Config::default();
        let mut b = a.clone();
        b.estimators.gp_noise = 0.2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let back = Config::from_toml(&a.to_toml()).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.hash(), a.hash());
    }

    #[test]
    fn roster_is_canonically_ordered() {
        let c = Config::from_toml("[estimators]\nroster = [\"fp-rf\", \"ffn-mve\"]\n").unwrap();
        let ids: Vec<String> = c.roster().unwrap().iter().map(|i| i.to_string()).collect();
        assert_eq!(ids, vec!["ffn-mve", "fp-rf"]);
    }
}
