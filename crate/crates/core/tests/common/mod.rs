#![allow(dead_code)]

use rand::Rng;
use uqmol::chem::parse_smiles;
use uqmol::nnet::{featurize, Featurizer, Head, Input, NetConfig, Readout, TrainedModel};
use uqmol::seed;

pub const FD_STEP: f64 = 1e-4;

pub struct GradCheck {
    pub max_rel_err: f64,
    pub checked: usize,
    pub skipped: usize,
}

/// A random small network configuration drawn from `seed`.
pub fn random_config(seed_: u64) -> NetConfig {
    let mut rng = seed::rng(seed_);
    NetConfig {
        featurizer: if rng.gen_bool(0.5) {
            Featurizer::Graph
        } else {
            Featurizer::Fingerprint
        },
        hidden: rng.gen_range(2..7),
        depth: rng.gen_range(1..4),
        readout: if rng.gen_bool(0.5) {
            Readout::Mean
        } else {
            Readout::Sum
        },
        dense_layers: rng.gen_range(1..3),
        dropout: if rng.gen_bool(0.5) { 0.0 } else { 0.25 },
        head: if rng.gen_bool(0.5) {
            Head::Scalar
        } else {
            Head::MeanVariance
        },
        variance_floor: 1e-6,
        fp_length: 32,
        fp_radius: 2,
    }
}

/// Compare reverse-mode gradients against central differences on every
/// parameter. Parameters whose perturbation flips a ReLU are skipped:
/// the loss is not differentiable there.
pub fn gradient_check(config: NetConfig, seed_: u64) -> GradCheck {
    let mut rng = seed::rng(seed::derive(seed_, "data"));
    let smiles = ["CCO", "c1ccccc1N", "CC(=O)Oc1ccccc1", "C1CC1C#N"];
    let inputs: Vec<Input> = smiles
        .iter()
        .map(|s| featurize(&parse_smiles(s).unwrap(), &config).unwrap())
        .collect();
    let targets: Vec<f64> = inputs.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    let batch: Vec<(&Input, f64)> = inputs.iter().zip(targets.iter().copied()).collect();
    let mut model = TrainedModel::init(config, seed_).unwrap();
    // halve the weights so activations stay O(1) (a collapsed variance makes
    // the loss too large for differences to resolve) and give the biases
    // non-zero values so every parameter block is exercised
    for p in model.params.iter_mut() {
        if *p == 0.0 {
            *p = rng.gen_range(-0.2..0.2);
        } else {
            *p *= 0.5;
        }
    }
    let mask = Some(seed::derive(seed_, "mask"));
    let (_, grad) = model.loss_and_gradient(&batch, mask).unwrap();
    let pattern = model.relu_pattern(&batch, mask).unwrap();
    let mut out = GradCheck {
        max_rel_err: 0.0,
        checked: 0,
        skipped: 0,
    };
    for i in 0..model.params.len() {
        let orig = model.params[i];
        model.params[i] = orig + FD_STEP;
        let plus = model.loss(&batch, mask).unwrap();
        let p_plus = model.relu_pattern(&batch, mask).unwrap();
        model.params[i] = orig - FD_STEP;
        let minus = model.loss(&batch, mask).unwrap();
        let p_minus = model.relu_pattern(&batch, mask).unwrap();
        model.params[i] = orig;
        if p_plus != pattern || p_minus != pattern {
            out.skipped += 1;
            continue;
        }
        let fd = (plus - minus) / (2.0 * FD_STEP);
        let a = grad[i];
        let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
        out.max_rel_err = out.max_rel_err.max(rel);
        out.checked += 1;
    }
    out
}
