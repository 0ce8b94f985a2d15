use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Semantics;
use crate::nnet::Featurizer;

/// The uncertainty mechanism layered on a neural base model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Ensemble,
    Bootstrap,
    Snapshot,
    /// MC dropout at the given rate in percent.
    Dropout(u32),
    Mve,
    TanimotoDistance,
    LatentDistance,
    UnionGp,
    UnionRf,
}

/// One row of the estimator roster.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorId {
    Neural { base: Featurizer, method: Method },
    FpGp,
    FpRf,
}

impl EstimatorId {
    pub fn neural(base: Featurizer, method: Method) -> EstimatorId {
        EstimatorId::Neural { base, method }
    }

    pub fn semantics(self) -> Semantics {
        match self {
            EstimatorId::Neural {
                method: Method::TanimotoDistance | Method::LatentDistance,
                ..
            } => Semantics::Relative,
            _ => Semantics::VarianceLike,
        }
    }

    pub fn base(self) -> Option<Featurizer> {
        match self {
            EstimatorId::Neural { base, .. } => Some(base),
            _ => None,
        }
    }
}

/// The full roster for the given MC-dropout rates: ten methods on each
/// neural base, then the two fingerprint baselines.
pub fn roster(dropout_rates: &[f64]) -> Vec<EstimatorId> {
    let mut out = Vec::new();
    for base in [Featurizer::Graph, Featurizer::Fingerprint] {
        let mut methods = vec![Method::Ensemble, Method::Bootstrap, Method::Snapshot];
        methods.extend(dropout_rates.iter().map(|&p| Method::Dropout(percent(p))));
        methods.extend([
            Method::Mve,
            Method::TanimotoDistance,
            Method::LatentDistance,
            Method::UnionGp,
            Method::UnionRf,
        ]);
        out.extend(
            methods
                .into_iter()
                .map(|method| EstimatorId::neural(base, method)),
        );
    }
    out.push(EstimatorId::FpGp);
    out.push(EstimatorId::FpRf);
    out
}

pub(crate) fn percent(p: f64) -> u32 {
    (p * 100.0).round() as u32
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Ensemble => f.write_str("ensemble"),
            Method::Bootstrap => f.write_str("bootstrap"),
            Method::Snapshot => f.write_str("snapshot"),
            Method::Dropout(p) => write!(f, "dropout-{p}"),
            Method::Mve => f.write_str("mve"),
            Method::TanimotoDistance => f.write_str("tanimoto-distance"),
            Method::LatentDistance => f.write_str("latent-distance"),
            Method::UnionGp => f.write_str("union-gp"),
            Method::UnionRf => f.write_str("union-rf"),
        }
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorId::Neural { base, method } => write!(f, "{}-{method}", base.name()),
            EstimatorId::FpGp => f.write_str("fp-gp"),
            EstimatorId::FpRf => f.write_str("fp-rf"),
        }
    }
}

impl FromStr for EstimatorId {
    type Err = String;

    fn from_str(s: &str) -> Result<EstimatorId, String> {
        let bad = || format!("unknown estimator '{s}'");
        match s {
            "fp-gp" => return Ok(EstimatorId::FpGp),
            "fp-rf" => return Ok(EstimatorId::FpRf),
            _ => {}
        }
        let (base, rest) = s.split_once('-').ok_or_else(bad)?;
        let base = match base {
            "mpnn" => Featurizer::Graph,
            "ffn" => Featurizer::Fingerprint,
            _ => return Err(bad()),
        };
        let method = match rest {
            "ensemble" => Method::Ensemble,
            "bootstrap" => Method::Bootstrap,
            "snapshot" => Method::Snapshot,
            "mve" => Method::Mve,
            "tanimoto-distance" => Method::TanimotoDistance,
            "latent-distance" => Method::LatentDistance,
            "union-gp" => Method::UnionGp,
            "union-rf" => Method::UnionRf,
            _ => {
                let p = rest.strip_prefix("dropout-").ok_or_else(bad)?;
                let p: u32 = p.parse().map_err(|_| bad())?;
                if p == 0 || p >= 100 {
                    return Err(format!("dropout rate in '{s}' must be 1..=99 percent"));
                }
                Method::Dropout(p)
            }
        };
        Ok(EstimatorId::neural(base, method))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roster_has_22_rows_that_round_trip() {
        let r = roster(&[0.1, 0.2]);
        assert_eq!(r.len(), 22);
        for id in &r {
            assert_eq!(id.to_string().parse::<EstimatorId>().unwrap(), *id);
        }
        let relative: Vec<_> = r
            .iter()
            .filter(|i| i.semantics() == Semantics::Relative)
            .collect();
        assert_eq!(relative.len(), 4);
        assert!(r.iter().any(|i| i.to_string() == "ffn-dropout-10"));
        assert!(r.iter().any(|i| i.to_string() == "mpnn-dropout-20"));
        assert!("ffn-dropout-0".parse::<EstimatorId>().is_err());
        assert!("gnn-mve".parse::<EstimatorId>().is_err());
    }
}
