use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{wsrt_z, ComparisonCell, StatsError};
use crate::estimators::Semantics;
use crate::eval::{Metric, MetricReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// One pair per (dataset, random split).
    PerSplit,
    /// One pair per dataset: the median over its random splits.
    Median,
}

impl std::str::FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Aggregation, String> {
        match s {
            "per-split" => Ok(Aggregation::PerSplit),
            "median" => Ok(Aggregation::Median),
            _ => Err(format!(
                "unknown aggregation '{s}' (expected per-split or median)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMatrix {
    pub metric: Metric,
    pub aggregation: Aggregation,
    pub estimators: Vec<String>,
    /// `cells[i][j]` compares estimator i (primary) against j; the diagonal
    /// is `None`.
    pub cells: Vec<Vec<Option<ComparisonCell>>>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn is_random(split: &str) -> bool {
    split.starts_with("random")
}

/// Compare every ordered pair of estimators on `metric` over random splits.
/// Estimators keep their order of first appearance; relative-uncertainty
/// estimators are dropped for metrics that read U as a variance.
pub fn comparison_matrix(
    reports: &[MetricReport],
    metric: Metric,
    aggregation: Aggregation,
) -> Result<ComparisonMatrix, StatsError> {
    let usable: Vec<&MetricReport> = reports
        .iter()
        .filter(|r| is_random(&r.split))
        .filter(|r| !(metric.needs_variance() && r.semantics == Semantics::Relative))
        .collect();
    let mut estimators: Vec<String> = Vec::new();
    for r in &usable {
        if !estimators.contains(&r.estimator) {
            estimators.push(r.estimator.clone());
        }
    }
    if estimators.len() < 2 {
        return Err(StatsError::EmptyRoster);
    }
    let cells: BTreeSet<(String, String)> = usable
        .iter()
        .map(|r| (r.dataset.clone(), r.split.clone()))
        .collect();
    let lookup = |est: &str, ds: &str, sp: &str| {
        usable
            .iter()
            .find(|r| r.estimator == est && r.dataset == ds && r.split == sp)
            .and_then(|r| r.get(metric))
    };

    let mut missing = Vec::new();
    let mut scores: Vec<Vec<f64>> = Vec::new();
    for est in &estimators {
        let mut row = Vec::new();
        for (ds, sp) in &cells {
            match lookup(est, ds, sp) {
                Some(v) => row.push(v),
                None => missing.push(format!("{est}/{ds}/{sp}")),
            }
        }
        scores.push(row);
    }
    if !missing.is_empty() {
        return Err(StatsError::MissingCells(missing));
    }
    if aggregation == Aggregation::Median {
        let datasets: Vec<&String> = cells
            .iter()
            .map(|(d, _)| d)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        scores = scores
            .into_iter()
            .map(|row| {
                datasets
                    .iter()
                    .map(|d| {
                        let vals: Vec<f64> = cells
                            .iter()
                            .zip(&row)
                            .filter(|((ds, _), _)| ds == *d)
                            .map(|(_, &v)| v)
                            .collect();
                        median(&vals)
                    })
                    .collect()
            })
            .collect();
    }

    let k = estimators.len();
    let mut matrix = vec![vec![None; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let mut c = wsrt_z(&scores[i], &scores[j], metric.direction())?;
            c.primary = estimators[i].clone();
            c.secondary = estimators[j].clone();
            c.metric = metric.name().to_string();
            matrix[i][j] = Some(c);
        }
    }
    Ok(ComparisonMatrix {
        metric,
        aggregation,
        estimators,
        cells: matrix,
    })
}

impl ComparisonMatrix {
    /// Long-format CSV, one row per ordered pair.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "primary",
            "secondary",
            "metric",
            "n",
            "s",
            "z_si",
            "z_standard",
        ])
        .expect("in-memory write");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in self.cells.iter().flatten().flatten() {
            w.write_record([
                c.primary.clone(),
                c.secondary.clone(),
                c.metric.clone(),
                c.n.to_string(),
                c.s.to_string(),
                opt(c.z_si),
                opt(c.z_standard),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    /// Heatmap data: row and column ids with both z matrices (null on the
    /// diagonal and for undefined cells).
    pub fn to_heatmap_json(&self) -> String {
        let grid = |f: fn(&ComparisonCell) -> Option<f64>| -> Vec<Vec<Option<f64>>> {
            self.cells
                .iter()
                .map(|row| row.iter().map(|c| c.as_ref().and_then(f)).collect())
                .collect()
        };
        let v = serde_json::json!({
            "metric": self.metric,
            "aggregation": self.aggregation,
            "rows": self.estimators,
            "cols": self.estimators,
            "z_si": grid(|c| c.z_si),
            "z_standard": grid(|c| c.z_standard),
            "note": "z_si divides by n(n+1)(2n+1)/24; z_standard divides by its square root",
        });
        serde_json::to_string_pretty(&v).expect("json") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(est: &str, ds: &str, split: &str, rho: f64, sem: Semantics) -> MetricReport {
        MetricReport {
            estimator: est.into(),
            dataset: ds.into(),
            split: split.into(),
            semantics: sem,
            n_test: 1,
            rmse: rho,
            spearman: Some(rho),
            miscalibration_area: None,
            nll: Some(rho),
            ideal_nll: 0.0,
            nll_difference: None,
            cnll: None,
            cnll_difference: None,
            calibration: None,
            retention_rmse: None,
            notes: vec![],
        }
    }

    fn fixture() -> Vec<MetricReport> {
        let mut out = Vec::new();
        for ds in ["a", "b", "c"] {
            for s in 0..8 {
                let split = format!("random-{s}");
                let base = s as f64 * 0.01 + ds.len() as f64;
                out.push(report(
                    "A",
                    ds,
                    &split,
                    base + 0.5 + s as f64 * 0.03,
                    Semantics::VarianceLike,
                ));
                out.push(report("B", ds, &split, base, Semantics::VarianceLike));
                out.push(report("D", ds, &split, base - 0.1, Semantics::Relative));
            }
            out.push(report("A", ds, "scaffold", 0.0, Semantics::VarianceLike));
        }
        out
    }

    #[test]
    fn strictly_better_is_positive_and_antisymmetric() {
        let m = comparison_matrix(&fixture(), Metric::Spearman, Aggregation::PerSplit).unwrap();
        assert_eq!(m.estimators, vec!["A", "B", "D"]);
        let ab = m.cells[0][1].as_ref().unwrap();
        assert_eq!(ab.n, 24);
        assert!(ab.z_si.unwrap() > 0.0);
        for i in 0..3 {
            assert!(m.cells[i][i].is_none());
            for j in 0..3 {
                if i != j {
                    let (x, y) = (
                        m.cells[i][j].as_ref().unwrap(),
                        m.cells[j][i].as_ref().unwrap(),
                    );
                    assert_eq!(x.z_si.unwrap(), -y.z_si.unwrap());
                }
            }
        }
        assert!(m.to_csv().lines().count() == 7);
        assert!(m.to_heatmap_json().contains("z_standard"));
    }

    #[test]
    fn median_reduces_to_datasets_and_nll_drops_relative() {
        let m = comparison_matrix(&fixture(), Metric::Spearman, Aggregation::Median).unwrap();
        assert_eq!(m.cells[0][1].as_ref().unwrap().n, 3);
        let m = comparison_matrix(&fixture(), Metric::Nll, Aggregation::PerSplit).unwrap();
        assert_eq!(m.estimators, vec!["A", "B"]);
        // Lower NLL is better, and A has the larger values.
        assert!(m.cells[0][1].as_ref().unwrap().z_si.unwrap() < 0.0);
    }

    #[test]
    fn missing_cells_are_listed() {
        let mut r = fixture();
        r.retain(|x| !(x.estimator == "B" && x.dataset == "b" && x.split == "random-3"));
        match comparison_matrix(&r, Metric::Spearman, Aggregation::PerSplit) {
            Err(StatsError::MissingCells(m)) => assert_eq!(m, vec!["B/b/random-3"]),
            other => panic!("{other:?}"),
        }
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
    }
}
