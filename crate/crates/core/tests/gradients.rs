mod common;

use common::{gradient_check, random_config};
use uqmol::nnet::{Featurizer, Head, NetConfig};

#[test]
fn random_configurations_match_finite_differences() {
    for s in 0..24 {
        let cfg = random_config(s);
        let r = gradient_check(cfg.clone(), 100 + s);
        assert!(r.checked > 0);
        assert!(r.max_rel_err < 1e-4, "config {cfg:?}: {}", r.max_rel_err);
    }
}

#[test]
fn every_architecture_and_head_is_covered() {
    for featurizer in [Featurizer::Graph, Featurizer::Fingerprint] {
        for head in [Head::Scalar, Head::MeanVariance] {
            let cfg = NetConfig {
                featurizer,
                head,
                hidden: 5,
                depth: 2,
                dense_layers: 2,
                fp_length: 32,
                fp_radius: 2,
                dropout: 0.1,
                ..Default::default()
            };
            let r = gradient_check(cfg, 7);
            assert!(
                r.max_rel_err < 1e-4,
                "{featurizer:?} {head:?}: {}",
                r.max_rel_err
            );
            assert!(r.checked > r.skipped);
        }
    }
}
