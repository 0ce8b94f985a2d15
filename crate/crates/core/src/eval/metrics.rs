use statrs::distribution::{ContinuousCDF, Normal};

use super::EvalError;
use crate::estimators::{PredictionSet, Semantics};

/// Retained fractions for the RMSE retention curve, most to least.
pub const RETENTION_FRACTIONS: [f64; 5] = [1.0, 0.5, 0.25, 0.10, 0.05];
pub const MIN_RETENTION: usize = 20;
/// Floor on squared residuals in the ideal NLL.
pub const RESIDUAL_CLAMP: f64 = 1e-12;
/// Number of interior confidence levels, p = 0.01 ..= 0.99.
pub const CONFIDENCE_LEVELS: usize = 99;

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of average ranks.
pub fn spearman_rho(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 3 {
        return Err(EvalError::TooFew { n: a.len(), min: 3 });
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let mean = (a.len() as f64 + 1.0) / 2.0;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean) * (y - mean);
        va += (x - mean) * (x - mean);
        vb += (y - mean) * (y - mean);
    }
    if va == 0.0 || vb == 0.0 {
        return Err(EvalError::Undefined(
            "constant input has zero rank variance",
        ));
    }
    Ok((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

fn require_variance(ps: &PredictionSet) -> Result<(), EvalError> {
    match ps.semantics {
        Semantics::VarianceLike => Ok(()),
        Semantics::Relative => Err(EvalError::RelativeSemantics),
    }
}

/// Expected vs observed coverage of two-sided Gaussian intervals at
/// p = 0, 0.01, ..., 0.99, 1.
///
/// A point with zero uncertainty lies inside an interval only when its error
/// is exactly zero, except at p = 1 where every interval is unbounded.
pub fn calibration_curve(ps: &PredictionSet) -> Result<Vec<(f64, f64)>, EvalError> {
    require_variance(ps)?;
    if ps.is_empty() {
        return Err(EvalError::TooFew { n: 0, min: 1 });
    }
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    let n = ps.len() as f64;
    let err = ps.abs_errors();
    let mut curve = Vec::with_capacity(CONFIDENCE_LEVELS + 2);
    curve.push((0.0, 0.0));
    for k in 1..=CONFIDENCE_LEVELS {
        let p = k as f64 / (CONFIDENCE_LEVELS + 1) as f64;
        let z = std.inverse_cdf((1.0 + p) / 2.0);
        let inside = err
            .iter()
            .zip(&ps.uncertainties)
            .filter(|&(&e, &u)| e <= z * u.sqrt())
            .count();
        curve.push((p, inside as f64 / n));
    }
    curve.push((1.0, 1.0));
    Ok(curve)
}

/// Trapezoidal area between the calibration curve and the parity line.
pub fn miscalibration_area(ps: &PredictionSet) -> Result<f64, EvalError> {
    let curve = calibration_curve(ps)?;
    let area = curve
        .windows(2)
        .map(|w| {
            let (d0, d1) = ((w[0].1 - w[0].0).abs(), (w[1].1 - w[1].0).abs());
            0.5 * (d0 + d1) * (w[1].0 - w[0].0)
        })
        .sum::<f64>();
    Ok(area.clamp(0.0, 0.5))
}

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Mean Gaussian negative log likelihood with U as the variance.
pub fn nll(ps: &PredictionSet) -> Result<f64, EvalError> {
    require_variance(ps)?;
    gaussian_nll(&ps.residuals(), &ps.uncertainties)
}

pub(crate) fn gaussian_nll(residuals: &[f64], variances: &[f64]) -> Result<f64, EvalError> {
    if residuals.is_empty() {
        return Err(EvalError::TooFew { n: 0, min: 1 });
    }
    let mut total = 0.0;
    for (i, (&r, &v)) in residuals.iter().zip(variances).enumerate() {
        if !(v > 0.0) {
            return Err(EvalError::NonPositiveUncertainty { index: i, value: v });
        }
        total += HALF_LN_2PI + 0.5 * (v.ln() + r * r / v);
    }
    Ok(total / residuals.len() as f64)
}

/// NLL of an estimator that predicts U = r² at every point, with r² clamped
/// at [`RESIDUAL_CLAMP`].
pub fn ideal_nll(ps: &PredictionSet) -> Result<f64, EvalError> {
    if ps.is_empty() {
        return Err(EvalError::TooFew { n: 0, min: 1 });
    }
    let total: f64 = ps
        .residuals()
        .iter()
        .map(|r| HALF_LN_2PI + 0.5 * ((r * r).max(RESIDUAL_CLAMP).ln() + 1.0))
        .sum();
    Ok(total / ps.len() as f64)
}

/// RMSE over the lowest-uncertainty fraction of points for each of
/// [`RETENTION_FRACTIONS`]. Ties in U keep input order; each subset holds
/// `ceil(f * n)` points, at least one.
pub fn retention_curve(ps: &PredictionSet) -> Result<[f64; 5], EvalError> {
    let n = ps.len();
    if n < MIN_RETENTION {
        return Err(EvalError::TooFew {
            n,
            min: MIN_RETENTION,
        });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| ps.uncertainties[a].total_cmp(&ps.uncertainties[b]));
    let res = ps.residuals();
    let mut out = [0.0; 5];
    for (o, f) in out.iter_mut().zip(RETENTION_FRACTIONS) {
        let count = ((f * n as f64).ceil() as usize).clamp(1, n);
        let sse: f64 = idx[..count].iter().map(|&i| res[i] * res[i]).sum();
        *o = (sse / count as f64).sqrt();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pred: &[f64], unc: &[f64], truth: &[f64]) -> PredictionSet {
        PredictionSet::from_vectors(
            pred.into(),
            unc.into(),
            truth.into(),
            Semantics::VarianceLike,
        )
        .unwrap()
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman_rho(&[1., 2., 3.], &[10., 20., 30.]).unwrap(), 1.0);
        assert_eq!(spearman_rho(&[1., 2., 3.], &[3., 2., 1.]).unwrap(), -1.0);
        assert!((spearman_rho(&[1., 2., 3.], &[1., 3., 2.]).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            spearman_rho(&[1., 1., 1.], &[1., 2., 3.]),
            Err(EvalError::Undefined(_))
        ));
        assert_eq!(
            average_ranks(&[2.0, 1.0, 2.0, 5.0]),
            vec![2.5, 1.0, 2.5, 4.0]
        );
    }

    #[test]
    fn nll_examples() {
        let a = nll(&set(&[0.0], &[1.0], &[0.0])).unwrap();
        assert!((a - 0.918938533204672).abs() < 1e-12);
        let b = nll(&set(&[1.0], &[1.0], &[0.0])).unwrap();
        assert!((b - 1.418938533204672).abs() < 1e-12);
        let c = nll(&set(&[0.0, 0.0], &[3.0, 3.0], &[0.0, 0.0])).unwrap();
        assert!((c - a - 0.5 * 3f64.ln()).abs() < 1e-12);
        assert!(nll(&set(&[0.0], &[0.0], &[0.0])).is_err());
    }

    #[test]
    fn ideal_nll_examples() {
        let ps = set(&[1.0, -1.0, 2.0], &[1.0, 1.0, 1.0], &[0.0, 0.0, 1.0]);
        assert!((ideal_nll(&ps).unwrap() - (HALF_LN_2PI + 0.5)).abs() < 1e-12);
        let exact = set(&[0.5, 2.0], &[0.25, 4.0], &[0.0, 0.0]);
        assert!((nll(&exact).unwrap() - ideal_nll(&exact).unwrap()).abs() < 1e-12);
        assert!(ideal_nll(&set(&[1.0], &[1.0], &[1.0])).unwrap().is_finite());
    }

    #[test]
    fn vanishing_uncertainty_is_maximally_miscalibrated() {
        let ps = set(&[1.0; 50], &[0.0; 50], &[0.0; 50]);
        let curve = calibration_curve(&ps).unwrap();
        assert!(curve[1..curve.len() - 1].iter().all(|&(_, o)| o == 0.0));
        // The interior grid stops at 0.99, so the trapezoid loses the final
        // sliver of the triangle.
        let area = miscalibration_area(&ps).unwrap();
        assert!((area - 0.495).abs() < 1e-12, "{area}");
    }

    #[test]
    fn retention_examples() {
        let n = 40;
        let err: Vec<f64> = (0..n).map(|i| i as f64 * 0.1).collect();
        let zero = vec![0.0; n];
        let ranked = set(&err, &err, &zero);
        let r = retention_curve(&ranked).unwrap();
        assert!(r.windows(2).all(|w| w[1] <= w[0]));
        let constant = set(&err, &vec![1.0; n], &zero);
        assert_eq!(retention_curve(&constant).unwrap()[0], constant.rmse());
        let adversarial: Vec<f64> = err.iter().map(|e| 10.0 - e).collect();
        let r = retention_curve(&set(&err, &adversarial, &zero)).unwrap();
        assert!(r[4] >= r[0]);
        assert!(retention_curve(&set(&[0.0; 19], &[1.0; 19], &[0.0; 19])).is_err());
    }
}
