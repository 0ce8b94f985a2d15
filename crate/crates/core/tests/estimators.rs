use std::time::Instant;

use uqmol::data::{random_split, synth::bundled, Dataset};
use uqmol::estimators::{
    roster, run_estimator, EstimatorId, Method, Semantics, Settings, SplitContext,
};
use uqmol::nnet::{Featurizer, NetConfig, TrainConfig};
use uqmol::shallow::ForestParams;

fn small_settings() -> Settings {
    Settings {
        net: NetConfig {
            hidden: 16,
            depth: 2,
            dense_layers: 1,
            fp_length: 512,
            ..Default::default()
        },
        train: TrainConfig {
            epochs: 6,
            batch_size: 16,
            ..Default::default()
        },
        ensemble_size: 3,
        dropout_passes: 4,
        forest: ForestParams {
            trees: 16,
            ..Default::default()
        },
        ..Default::default()
    }
}

fn dataset(name: &str, n: usize) -> Dataset {
    bundled(name).unwrap().truncated(n)
}

fn context(d: &Dataset, settings: Settings) -> SplitContext {
    SplitContext::new(d, random_split(d, 0).unwrap(), settings, 42).unwrap()
}

#[test]
fn every_estimator_emits_aligned_finite_predictions() {
    let d = dataset("solubility", 120);
    let ctx = context(&d, small_settings());
    let ids = roster(&[0.1, 0.2]);
    assert_eq!(ids.len(), 22);
    for id in ids {
        let t = Instant::now();
        let run = run_estimator(&ctx, id).unwrap_or_else(|e| panic!("{id}: {e}"));
        eprintln!("{id}: {:.2?}", t.elapsed());
        for ps in [&run.test, &run.validation] {
            assert_eq!(ps.estimator, id.to_string());
            assert_eq!(ps.semantics, id.semantics());
            assert!(ps.predictions.iter().all(|p| p.is_finite()));
            assert!(ps.uncertainties.iter().all(|u| u.is_finite() && *u >= 0.0));
        }
        assert_eq!(run.test.len(), ctx.split.test.len());
        assert_eq!(run.validation.len(), ctx.split.validation.len());
        assert_eq!(run.test.truths, ctx.targets(&ctx.split.test));
        let relative = matches!(
            id,
            EstimatorId::Neural {
                method: Method::TanimotoDistance | Method::LatentDistance,
                ..
            }
        );
        assert_eq!(id.semantics() == Semantics::Relative, relative);
    }
}

#[test]
fn reruns_are_bit_identical() {
    let d = dataset("lipophilicity", 80);
    for id in [
        "ffn-ensemble",
        "ffn-dropout-20",
        "mpnn-mve",
        "fp-rf",
        "ffn-union-gp",
    ] {
        let id: EstimatorId = id.parse().unwrap();
        let a = run_estimator(&context(&d, small_settings()), id).unwrap();
        let b = run_estimator(&context(&d, small_settings()), id).unwrap();
        assert_eq!(a.test, b.test, "{id}");
        assert_eq!(a.validation, b.validation, "{id}");
    }
}

#[test]
fn structure_distance_is_model_independent() {
    let d = dataset("solvation", 80);
    let ctx = context(&d, small_settings());
    let m = run_estimator(
        &ctx,
        EstimatorId::neural(Featurizer::Graph, Method::TanimotoDistance),
    )
    .unwrap();
    let f = run_estimator(
        &ctx,
        EstimatorId::neural(Featurizer::Fingerprint, Method::TanimotoDistance),
    )
    .unwrap();
    assert_eq!(m.test.uncertainties, f.test.uncertainties);
    assert_ne!(m.test.predictions, f.test.predictions);
    assert_eq!(m.manifest.k_neighbors, Some(8));
}

#[test]
fn manifests_record_mechanisms() {
    let d = dataset("solubility", 100);
    let ctx = context(&d, small_settings());
    let ffn = |m| EstimatorId::neural(Featurizer::Fingerprint, m);

    let snap = run_estimator(&ctx, ffn(Method::Snapshot)).unwrap().manifest;
    assert_eq!(snap.members, 3);
    assert_eq!(snap.snapshot_epochs, vec![3, 6, 9]);
    let log = &snap.training[0].epochs;
    for &e in &snap.snapshot_epochs[..2] {
        assert!(
            log[e].lr_start > log[e - 1].lr_end,
            "no reset after epoch {e}"
        );
    }

    let boot = run_estimator(&ctx, ffn(Method::Bootstrap))
        .unwrap()
        .manifest;
    let quarter = ctx.split.train.len() / 4;
    assert_eq!(boot.bootstrap_subsets.len(), 3);
    assert!(boot.bootstrap_subsets.iter().all(|s| s.len() == quarter));
    assert!(boot
        .bootstrap_subsets
        .iter()
        .flatten()
        .all(|i| ctx.split.train.contains(i)));
    assert!(
        !boot.warnings.is_empty(),
        "subset smaller than batch should warn"
    );

    let union = run_estimator(&ctx, ffn(Method::UnionRf)).unwrap().manifest;
    assert_eq!(union.tail_fit_set.as_deref(), Some("validation"));
    assert_eq!(union.tail_rows, Some(ctx.split.validation.len()));
    let fp = run_estimator(&ctx, EstimatorId::FpGp).unwrap().manifest;
    assert_eq!(fp.tail_fit_set.as_deref(), Some("train"));
    assert_eq!(fp.tail_rows, Some(ctx.split.train.len()));

    let ens = run_estimator(&ctx, ffn(Method::Ensemble)).unwrap().manifest;
    assert_eq!(ens.members, 3);
    let mc = run_estimator(&ctx, ffn(Method::Dropout(10)))
        .unwrap()
        .manifest;
    assert_eq!((mc.members, mc.dropout), (4, Some(0.1)));
}

#[test]
fn single_tree_tails_have_zero_variance() {
    let d = dataset("solubility", 80);
    let mut s = small_settings();
    s.forest.trees = 1;
    let ctx = context(&d, s);
    for id in [
        EstimatorId::FpRf,
        EstimatorId::neural(Featurizer::Fingerprint, Method::UnionRf),
    ] {
        let run = run_estimator(&ctx, id).unwrap();
        assert!(run.test.uncertainties.iter().all(|&u| u == 0.0), "{id}");
    }
}

#[test]
fn constant_train_targets_are_rejected() {
    let d = dataset("solubility", 60);
    let split = random_split(&d, 3).unwrap();
    let records: Vec<_> = d
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| uqmol::data::Record {
            smiles: r.smiles.clone(),
            target: if split.train.contains(&i) {
                2.0
            } else {
                i as f64
            },
        })
        .collect();
    let d = Dataset::new("flat", "", records).unwrap();
    // Zero train variance leaves the target scaler undefined.
    assert!(SplitContext::new(&d, split, small_settings(), 1).is_err());
}

#[test]
fn invalid_settings_are_rejected() {
    let d = dataset("solubility", 40);
    let split = random_split(&d, 0).unwrap();
    for bad in [
        Settings {
            dropout_passes: 1,
            ..small_settings()
        },
        Settings {
            ensemble_size: 1,
            ..small_settings()
        },
        Settings {
            dropout_rates: vec![0.0],
            ..small_settings()
        },
        Settings {
            bootstrap_fraction: 0.0,
            ..small_settings()
        },
    ] {
        assert!(SplitContext::new(&d, split.clone(), bad, 0).is_err());
    }
    let ctx = SplitContext::new(
        &d,
        split,
        Settings {
            k_neighbors: 1000,
            ..small_settings()
        },
        0,
    )
    .unwrap();
    assert!(run_estimator(
        &ctx,
        EstimatorId::neural(Featurizer::Fingerprint, Method::LatentDistance)
    )
    .is_err());
}

#[test]
fn mve_training_loss_falls_early() {
    let d = dataset("lipophilicity", 200);
    let ctx = context(&d, small_settings());
    let run = run_estimator(
        &ctx,
        EstimatorId::neural(Featurizer::Fingerprint, Method::Mve),
    )
    .unwrap();
    let losses: Vec<f64> = run.manifest.training[0]
        .epochs
        .iter()
        .map(|e| e.train_loss)
        .take(5)
        .collect();
    assert!(losses.windows(2).all(|w| w[1] < w[0]), "{losses:?}");
    assert!(run.test.uncertainties.iter().all(|&u| u > 0.0));
}
