//! Pairwise estimator comparison with a signed-rank z-score.
//!
//! The headline z divides the centred rank sum by the variance term
//! `n(n+1)(2n+1)/24` itself; the conventional test divides by its square
//! root. Both are reported and always share sign.

mod matrix;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::average_ranks;

pub use matrix::{comparison_matrix, median, Aggregation, ComparisonMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("score vectors differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 paired scores, got {0}")]
    TooFew(usize),
    #[error("non-finite score at index {0}")]
    NonFinite(usize),
    #[error("missing cells: {}", .0.join(", "))]
    MissingCells(Vec<String>),
    #[error("fewer than two estimators to compare")]
    EmptyRoster,
}

/// One signed-rank comparison of a primary against a secondary estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCell {
    pub primary: String,
    pub secondary: String,
    pub metric: String,
    /// `primary - secondary` per paired score, zeros included.
    pub differences: Vec<f64>,
    /// Pairs left after dropping zero differences.
    pub n: usize,
    /// Sum of ranks of |d| over pairs the primary won.
    pub s: f64,
    /// `(S - n(n+1)/4) / (n(n+1)(2n+1)/24)`; `None` when n = 0.
    pub z_si: Option<f64>,
    /// `(S - n(n+1)/4) / sqrt(n(n+1)(2n+1)/24)`; `None` when n = 0.
    pub z_standard: Option<f64>,
}

/// Signed-rank comparison of paired scores. Zero differences are dropped and
/// `n` decremented; tied |d| share average ranks.
pub fn wsrt_z(
    primary: &[f64],
    secondary: &[f64],
    direction: Direction,
) -> Result<ComparisonCell, StatsError> {
    if primary.len() != secondary.len() {
        return Err(StatsError::LengthMismatch(primary.len(), secondary.len()));
    }
    if primary.len() < 2 {
        return Err(StatsError::TooFew(primary.len()));
    }
    if let Some(i) =
        (0..primary.len()).find(|&i| !primary[i].is_finite() || !secondary[i].is_finite())
    {
        return Err(StatsError::NonFinite(i));
    }
    let differences: Vec<f64> = primary.iter().zip(secondary).map(|(x, y)| x - y).collect();
    let nonzero: Vec<f64> = differences.iter().copied().filter(|&d| d != 0.0).collect();
    let abs: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let s: f64 = nonzero
        .iter()
        .zip(&ranks)
        .filter(|(&d, _)| match direction {
            Direction::HigherBetter => d > 0.0,
            Direction::LowerBetter => d < 0.0,
        })
        .map(|(_, r)| r)
        .sum();
    let n = nonzero.len();
    let (z_si, z_standard) = if n == 0 {
        (None, None)
    } else {
        let nf = n as f64;
        let centred = s - nf * (nf + 1.0) / 4.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;
        (Some(centred / var), Some(centred / var.sqrt()))
    };
    Ok(ComparisonCell {
        primary: String::new(),
        secondary: String::new(),
        metric: String::new(),
        differences,
        n,
        s,
        z_si,
        z_standard,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_wins() {
        let c = wsrt_z(
            &[2., 3., 4., 5., 6.],
            &[1., 1., 1., 1., 1.],
            Direction::HigherBetter,
        )
        .unwrap();
        assert_eq!(c.s, 15.0);
        assert!((c.z_si.unwrap() - 7.5 / 13.75).abs() < 1e-12);
        assert!((c.z_standard.unwrap() - 7.5 / 13.75f64.sqrt()).abs() < 1e-12);
        assert!((c.z_si.unwrap() - 0.545).abs() < 5e-4);
        assert!((c.z_standard.unwrap() - 2.023).abs() < 5e-4);
        let lower = wsrt_z(&[2., 3., 4., 5., 6.], &[1.; 5], Direction::LowerBetter).unwrap();
        assert_eq!(lower.z_si, Some(-c.z_si.unwrap()));
    }

    #[test]
    fn ties_and_identical() {
        let c = wsrt_z(&[1., 2., 3.], &[1., 2., 3.], Direction::HigherBetter).unwrap();
        assert_eq!(c.n, 0);
        assert!(c.z_si.is_none());
        let c = wsrt_z(&[1., 2., 3.], &[1., 1., 4.], Direction::HigherBetter).unwrap();
        assert_eq!(c.n, 2);
        assert_eq!(c.s, 1.5);
        assert!(wsrt_z(&[1.], &[1.], Direction::HigherBetter).is_err());
    }

    #[test]
    fn swap_negates() {
        let a = [0.3, 0.1, 0.9, 0.4, 0.25];
        let b = [0.2, 0.5, 0.1, 0.41, 0.0];
        let x = wsrt_z(&a, &b, Direction::HigherBetter).unwrap();
        let y = wsrt_z(&b, &a, Direction::HigherBetter).unwrap();
        assert!((x.z_si.unwrap() + y.z_si.unwrap()).abs() < 1e-12);
        assert!((x.z_standard.unwrap() + y.z_standard.unwrap()).abs() < 1e-12);
    }
}
