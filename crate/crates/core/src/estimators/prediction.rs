use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EstimatorError;

/// How an uncertainty value should be read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Semantics {
    /// A predicted variance in target units squared.
    VarianceLike,
    /// Only the ordering is meaningful (distance-based estimators).
    Relative,
}

/// Aligned predictions, uncertainties and truths for one estimator on one
/// split, in original target units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub estimator: String,
    pub split: String,
    pub semantics: Semantics,
    pub smiles: Vec<String>,
    pub predictions: Vec<f64>,
    pub uncertainties: Vec<f64>,
    pub truths: Vec<f64>,
}

impl PredictionSet {
    pub fn new(
        estimator: impl Into<String>,
        split: impl Into<String>,
        semantics: Semantics,
        smiles: Vec<String>,
        predictions: Vec<f64>,
        uncertainties: Vec<f64>,
        truths: Vec<f64>,
    ) -> Result<PredictionSet, EstimatorError> {
        let n = truths.len();
        if predictions.len() != n || uncertainties.len() != n || smiles.len() != n {
            return Err(EstimatorError::Misaligned);
        }
        if let Some(i) = (0..n).find(|&i| {
            !predictions[i].is_finite() || !truths[i].is_finite() || !uncertainties[i].is_finite()
        }) {
            return Err(EstimatorError::NonFinite { index: i });
        }
        if let Some(i) = uncertainties.iter().position(|&u| u < 0.0) {
            return Err(EstimatorError::NegativeUncertainty { index: i });
        }
        Ok(PredictionSet {
            estimator: estimator.into(),
            split: split.into(),
            semantics,
            smiles,
            predictions,
            uncertainties,
            truths,
        })
    }

    /// Build from bare vectors, with placeholder identifiers.
    pub fn from_vectors(
        predictions: Vec<f64>,
        uncertainties: Vec<f64>,
        truths: Vec<f64>,
        semantics: Semantics,
    ) -> Result<PredictionSet, EstimatorError> {
        let smiles = vec![String::new(); truths.len()];
        PredictionSet::new(
            "",
            "",
            semantics,
            smiles,
            predictions,
            uncertainties,
            truths,
        )
    }

    pub fn len(&self) -> usize {
        self.truths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truths.is_empty()
    }

    /// `prediction - truth` per point.
    pub fn residuals(&self) -> Vec<f64> {
        self.predictions
            .iter()
            .zip(&self.truths)
            .map(|(p, t)| p - t)
            .collect()
    }

    pub fn abs_errors(&self) -> Vec<f64> {
        self.residuals().into_iter().map(f64::abs).collect()
    }

    pub fn rmse(&self) -> f64 {
        let r = self.residuals();
        (r.iter().map(|e| e * e).sum::<f64>() / r.len().max(1) as f64).sqrt()
    }

    /// CSV with columns `smiles,prediction,uncertainty,truth`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["smiles", "prediction", "uncertainty", "truth"])
            .expect("in-memory write");
        for i in 0..self.len() {
            w.write_record([
                self.smiles[i].clone(),
                format!("{}", self.predictions[i]),
                format!("{}", self.uncertainties[i]),
                format!("{}", self.truths[i]),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn read_csv(
        path: &Path,
        estimator: &str,
        split: &str,
        semantics: Semantics,
    ) -> Result<PredictionSet, EstimatorError> {
        let mut r = csv::Reader::from_path(path).map_err(|e| EstimatorError::Io(e.to_string()))?;
        let (mut s, mut p, mut u, mut t) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for row in r.records() {
            let row = row.map_err(|e| EstimatorError::Io(e.to_string()))?;
            let num = |i: usize| -> Result<f64, EstimatorError> {
                row.get(i)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| EstimatorError::Io(format!("bad number in {}", path.display())))
            };
            s.push(row.get(0).unwrap_or("").to_string());
            p.push(num(1)?);
            u.push(num(2)?);
            t.push(num(3)?);
        }
        PredictionSet::new(estimator, split, semantics, s, p, u, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(PredictionSet::from_vectors(
            vec![1.0],
            vec![0.1, 0.2],
            vec![1.0],
            Semantics::VarianceLike
        )
        .is_err());
        assert!(matches!(
            PredictionSet::from_vectors(vec![1.0], vec![-0.1], vec![1.0], Semantics::VarianceLike),
            Err(EstimatorError::NegativeUncertainty { index: 0 })
        ));
        assert!(PredictionSet::from_vectors(
            vec![f64::NAN],
            vec![0.1],
            vec![1.0],
            Semantics::Relative
        )
        .is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ps = PredictionSet::new(
            "e",
            "s",
            Semantics::Relative,
            vec!["CC".into(), "C,O".into()],
            vec![0.1 + 0.2, -3.0],
            vec![1e-300, 2.5],
            vec![0.0, 7.25],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        std::fs::write(&path, ps.to_csv()).unwrap();
        assert_eq!(
            PredictionSet::read_csv(&path, "e", "s", Semantics::Relative).unwrap(),
            ps
        );
    }
}
