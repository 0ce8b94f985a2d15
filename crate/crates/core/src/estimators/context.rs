use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::EstimatorError;
use crate::chem::{circular_fingerprint, Fingerprint, Molecule};
use crate::data::{Dataset, Scaler, SplitAssignment};
use crate::nnet::{
    featurize_all, train, Featurizer, Head, Input, NetConfig, TrainConfig, TrainedModel,
};
use crate::seed;
use crate::shallow::{ForestParams, GpParams};

/// Every tunable that affects estimator outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    /// Architecture template; featurizer, head and dropout are set per
    /// estimator.
    pub net: NetConfig,
    pub train: TrainConfig,
    pub ensemble_size: usize,
    pub bootstrap_fraction: f64,
    pub snapshot_every: usize,
    pub dropout_rates: Vec<f64>,
    pub dropout_passes: usize,
    pub k_neighbors: usize,
    pub forest: ForestParams,
    pub gp: GpParams,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            net: NetConfig::default(),
            train: TrainConfig::default(),
            ensemble_size: 16,
            bootstrap_fraction: 0.25,
            snapshot_every: 3,
            dropout_rates: vec![0.1, 0.2],
            dropout_passes: 16,
            k_neighbors: 8,
            forest: ForestParams::default(),
            gp: GpParams::default(),
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        let bad = |m: String| Err(EstimatorError::InvalidConfig(m));
        self.net.validate()?;
        if self.ensemble_size < 2 {
            return bad(format!("ensemble size {} below 2", self.ensemble_size));
        }
        if !(self.bootstrap_fraction > 0.0 && self.bootstrap_fraction <= 1.0) {
            return bad(format!(
                "bootstrap fraction {} outside (0, 1]",
                self.bootstrap_fraction
            ));
        }
        if self.snapshot_every == 0 {
            return bad("snapshot interval must be at least 1 epoch".into());
        }
        if let Some(p) = self.dropout_rates.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
            return bad(format!("dropout rate {p} outside (0, 1)"));
        }
        if self.dropout_passes < 2 {
            return bad(format!(
                "MC dropout needs at least 2 passes, got {}",
                self.dropout_passes
            ));
        }
        if self.k_neighbors == 0 {
            return bad("k must be at least 1".into());
        }
        if self.forest.trees == 0 {
            return bad("forest needs at least one tree".into());
        }
        if !(self.gp.noise > 0.0 && self.gp.prior_variance > 0.0) {
            return bad("GP noise and prior variance must be positive".into());
        }
        if self.train.epochs == 0 || self.train.batch_size == 0 {
            return bad("epochs and batch size must be positive".into());
        }
        Ok(())
    }

    pub fn net_for(&self, base: Featurizer, head: Head, dropout: f64) -> NetConfig {
        NetConfig {
            featurizer: base,
            head,
            dropout,
            ..self.net.clone()
        }
    }
}

fn slot(f: Featurizer) -> usize {
    match f {
        Featurizer::Graph => 0,
        Featurizer::Fingerprint => 1,
    }
}

/// Everything shared by the estimators of one (dataset, split) cell:
/// molecules, the train-fitted target scaler, featurizations, and the two
/// base models used by the distance and union estimators. Lazily built
/// parts are computed once and shared across threads.
pub struct SplitContext {
    pub dataset: String,
    pub split: SplitAssignment,
    /// Seed of this split; estimator streams derive from it.
    pub seed: u64,
    pub settings: Settings,
    pub scaler: Scaler,
    smiles: Vec<String>,
    targets: Vec<f64>,
    molecules: Vec<Molecule>,
    fingerprints: OnceLock<Result<Vec<Fingerprint>, String>>,
    inputs: [OnceLock<Result<Vec<Input>, String>>; 2],
    base: [OnceLock<Result<TrainedModel, String>>; 2],
}

impl SplitContext {
    pub fn new(
        dataset: &Dataset,
        split: SplitAssignment,
        settings: Settings,
        master_seed: u64,
    ) -> Result<SplitContext, EstimatorError> {
        settings.validate()?;
        if !split.is_partition_of(dataset.len()) {
            return Err(EstimatorError::InvalidConfig(format!(
                "split {} does not partition dataset {}",
                split.id(),
                dataset.name()
            )));
        }
        for (part, idx) in [
            ("train", &split.train),
            ("validation", &split.validation),
            ("test", &split.test),
        ] {
            if idx.is_empty() {
                return Err(EstimatorError::EmptyPart(part));
            }
        }
        let targets = dataset.targets();
        let train_y: Vec<f64> = split.train.iter().map(|&i| targets[i]).collect();
        let scaler = Scaler::fit(&train_y)?;
        let seed = seed::derive(seed::derive(master_seed, dataset.name()), &split.id());
        Ok(SplitContext {
            dataset: dataset.name().to_string(),
            seed,
            settings,
            scaler,
            smiles: dataset.smiles().into_iter().map(String::from).collect(),
            targets,
            molecules: dataset.molecules()?,
            split,
            fingerprints: OnceLock::new(),
            inputs: [OnceLock::new(), OnceLock::new()],
            base: [OnceLock::new(), OnceLock::new()],
        })
    }

    pub fn split_id(&self) -> String {
        self.split.id()
    }

    pub fn smiles(&self, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|&i| self.smiles[i].clone()).collect()
    }

    /// Targets in original units.
    pub fn targets(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().map(|&i| self.targets[i]).collect()
    }

    pub fn scaled_targets(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .map(|&i| self.scaler.transform(self.targets[i]))
            .collect()
    }

    /// Fingerprints of every molecule at the configured length and radius.
    pub fn fingerprints(&self) -> Result<&[Fingerprint], EstimatorError> {
        self.fingerprints
            .get_or_init(|| {
                self.molecules
                    .iter()
                    .map(|m| {
                        circular_fingerprint(
                            m,
                            self.settings.net.fp_length,
                            self.settings.net.fp_radius,
                        )
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| e.to_string())
            })
            .as_deref()
            .map_err(|e| EstimatorError::Featurize(e.clone()))
    }

    /// Network inputs of every molecule for one featurizer.
    pub fn inputs(&self, base: Featurizer) -> Result<&[Input], EstimatorError> {
        self.inputs[slot(base)]
            .get_or_init(|| {
                let config = self.settings.net_for(base, Head::Scalar, 0.0);
                featurize_all(&self.molecules, &config).map_err(|e| e.to_string())
            })
            .as_deref()
            .map_err(|e| EstimatorError::Featurize(e.clone()))
    }

    /// `(input, scaled target)` pairs for the given rows.
    pub fn pairs(
        &self,
        base: Featurizer,
        idx: &[usize],
    ) -> Result<Vec<(Input, f64)>, EstimatorError> {
        let inputs = self.inputs(base)?;
        Ok(idx
            .iter()
            .map(|&i| (inputs[i].clone(), self.scaler.transform(self.targets[i])))
            .collect())
    }

    /// Initialise and train one network on `train_idx`, early stopping on the
    /// validation part.
    pub fn train_network(
        &self,
        config: NetConfig,
        train_idx: &[usize],
        tc: &TrainConfig,
        seed_: u64,
    ) -> Result<crate::nnet::TrainOutcome, EstimatorError> {
        let base = config.featurizer;
        let model = TrainedModel::init(config, seed::derive(seed_, "init"))?;
        let train_pairs = self.pairs(base, train_idx)?;
        let val_pairs = self.pairs(base, &self.split.validation)?;
        Ok(train(
            model,
            &train_pairs,
            &val_pairs,
            tc,
            seed::derive(seed_, "train"),
        )?)
    }

    /// The plain scalar-head model of one base architecture, trained once
    /// per split and shared by the distance and union estimators.
    pub fn base_model(&self, base: Featurizer) -> Result<&TrainedModel, EstimatorError> {
        self.base[slot(base)]
            .get_or_init(|| {
                let config = self.settings.net_for(base, Head::Scalar, 0.0);
                let s = seed::derive(self.seed, &format!("base-{}", base.name()));
                self.train_network(config, &self.split.train, &self.settings.train, s)
                    .map(|o| o.model)
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| EstimatorError::BaseModel(e.clone()))
    }
}
