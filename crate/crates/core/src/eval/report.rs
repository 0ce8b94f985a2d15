use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    cnll, fit_calibration, ideal_nll, miscalibration_area, nll, retention_curve, spearman_rho,
    CalibrationParams,
};
use crate::estimators::{PredictionSet, Semantics};
use crate::stats::Direction;

/// All metrics for one (estimator, dataset, split) cell. Metrics that do not
/// apply or are undefined are `None`, with the reason in `notes`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub estimator: String,
    pub dataset: String,
    pub split: String,
    pub semantics: Semantics,
    pub n_test: usize,
    pub rmse: f64,
    pub spearman: Option<f64>,
    pub miscalibration_area: Option<f64>,
    pub nll: Option<f64>,
    pub ideal_nll: f64,
    pub nll_difference: Option<f64>,
    pub cnll: Option<f64>,
    pub cnll_difference: Option<f64>,
    pub calibration: Option<CalibrationParams>,
    /// RMSE at 100, 50, 25, 10 and 5 % retention.
    pub retention_rmse: Option<[f64; 5]>,
    pub notes: Vec<String>,
}

/// Score a test set, fitting the calibration map on `validation`.
pub fn evaluate(dataset: &str, test: &PredictionSet, validation: &PredictionSet) -> MetricReport {
    let mut notes = Vec::new();
    let mut keep = |what: &str, r: Result<f64, super::EvalError>| match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{what}: {e}"));
            None
        }
    };
    let spearman = keep(
        "spearman",
        spearman_rho(&test.uncertainties, &test.abs_errors()),
    );
    let variance_like = test.semantics == Semantics::VarianceLike;
    let (area, nll_v) = if variance_like {
        (
            keep("miscalibration_area", miscalibration_area(test)),
            keep("nll", nll(test)),
        )
    } else {
        (None, None)
    };
    let ideal = ideal_nll(test).unwrap_or(f64::NAN);
    let calibration = match fit_calibration(validation) {
        Ok(c) => Some(c),
        Err(e) => {
            notes.push(format!("calibration: {e}"));
            None
        }
    };
    let cnll_v = calibration.and_then(|c| cnll(test, &c).ok());
    let retention = match retention_curve(test) {
        Ok(r) => Some(r),
        Err(e) => {
            notes.push(format!("retention: {e}"));
            None
        }
    };
    if !variance_like {
        notes.push("nll and miscalibration_area: relative uncertainty".into());
    }
    MetricReport {
        estimator: test.estimator.clone(),
        dataset: dataset.to_string(),
        split: test.split.clone(),
        semantics: test.semantics,
        n_test: test.len(),
        rmse: test.rmse(),
        spearman,
        miscalibration_area: area,
        nll: nll_v,
        ideal_nll: ideal,
        nll_difference: nll_v.map(|v| v - ideal),
        cnll: cnll_v,
        cnll_difference: cnll_v.map(|v| v - ideal),
        calibration,
        retention_rmse: retention,
        notes,
    }
}

impl MetricReport {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Spearman => self.spearman,
            Metric::MiscalibrationArea => self.miscalibration_area,
            Metric::Nll => self.nll,
            Metric::NllDifference => self.nll_difference,
            Metric::Cnll => self.cnll,
            Metric::CnllDifference => self.cnll_difference,
            Metric::Rmse => Some(self.rmse),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }

    pub fn csv_header() -> Vec<&'static str> {
        vec![
            "estimator",
            "dataset",
            "split",
            "semantics",
            "n_test",
            "rmse",
            "spearman",
            "miscalibration_area",
            "nll",
            "ideal_nll",
            "nll_difference",
            "cnll",
            "cnll_difference",
            "calibration_a",
            "calibration_b",
            "rmse_100",
            "rmse_50",
            "rmse_25",
            "rmse_10",
            "rmse_5",
        ]
    }

    pub fn csv_row(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let semantics = match self.semantics {
            Semantics::VarianceLike => "variance-like",
            Semantics::Relative => "relative",
        };
        let mut row = vec![
            self.estimator.clone(),
            self.dataset.clone(),
            self.split.clone(),
            semantics.to_string(),
            self.n_test.to_string(),
            self.rmse.to_string(),
            opt(self.spearman),
            opt(self.miscalibration_area),
            opt(self.nll),
            self.ideal_nll.to_string(),
            opt(self.nll_difference),
            opt(self.cnll),
            opt(self.cnll_difference),
            opt(self.calibration.map(|c| c.a)),
            opt(self.calibration.map(|c| c.b)),
        ];
        for i in 0..5 {
            row.push(opt(self.retention_rmse.map(|r| r[i])));
        }
        row
    }
}

/// A scalar metric that can be tabulated and compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Spearman,
    MiscalibrationArea,
    Nll,
    NllDifference,
    Cnll,
    CnllDifference,
    Rmse,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Spearman,
        Metric::MiscalibrationArea,
        Metric::Nll,
        Metric::NllDifference,
        Metric::Cnll,
        Metric::CnllDifference,
        Metric::Rmse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Spearman => "spearman",
            Metric::MiscalibrationArea => "miscalibration_area",
            Metric::Nll => "nll",
            Metric::NllDifference => "nll_difference",
            Metric::Cnll => "cnll",
            Metric::CnllDifference => "cnll_difference",
            Metric::Rmse => "rmse",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Metric::Spearman => Direction::HigherBetter,
            _ => Direction::LowerBetter,
        }
    }

    /// Whether the metric treats U as a variance, so relative estimators
    /// are excluded.
    pub fn needs_variance(self) -> bool {
        matches!(
            self,
            Metric::MiscalibrationArea | Metric::Nll | Metric::NllDifference
        )
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Metric, String> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Metric::ALL.iter().map(|m| m.name()).collect();
                format!(
                    "unknown metric '{s}' (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(semantics: Semantics, n: usize) -> PredictionSet {
        let p: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64 * 0.1).collect();
        let u: Vec<f64> = (0..n).map(|i| 0.01 + ((i * 3) % 5) as f64 * 0.02).collect();
        PredictionSet::from_vectors(p, u, vec![0.5; n], semantics).unwrap()
    }

    #[test]
    fn relative_reports_skip_variance_metrics() {
        let ps = set(Semantics::Relative, 30);
        let r = evaluate("d", &ps, &ps);
        assert!(r.nll.is_none() && r.miscalibration_area.is_none());
        assert!(r.cnll.is_some() && r.spearman.is_some());
        let v = evaluate("d", &set(Semantics::VarianceLike, 30), &ps);
        assert!(v.nll.unwrap() >= v.ideal_nll);
        assert_eq!(MetricReport::csv_header().len(), v.csv_row().len());
        let back: MetricReport = serde_json::from_str(&v.to_json()).unwrap();
        assert_eq!(back.to_json(), v.to_json());
    }

    #[test]
    fn constant_uncertainty_spearman_is_noted() {
        let mut ps = set(Semantics::VarianceLike, 30);
        ps.uncertainties = vec![1.0; 30];
        let r = evaluate("d", &ps, &ps);
        assert!(r.spearman.is_none());
        assert!(r.notes.iter().any(|n| n.starts_with("spearman")));
        assert!(Metric::from_str("nll").is_ok() && Metric::from_str("x").is_err());
    }
}
