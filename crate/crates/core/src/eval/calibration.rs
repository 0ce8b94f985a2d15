use serde::{Deserialize, Serialize};

use super::metrics::gaussian_nll;
use super::EvalError;
use crate::estimators::PredictionSet;

/// Lower bound on calibrated variances.
pub const VARIANCE_FLOOR: f64 = 1e-8;
pub const MIN_CALIBRATION: usize = 10;

/// Affine map `a * U + b` from raw uncertainty to variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationParams {
    pub a: f64,
    pub b: f64,
    /// Validation NLL achieved by the map.
    pub validation_nll: f64,
}

impl CalibrationParams {
    pub fn identity() -> CalibrationParams {
        CalibrationParams {
            a: 1.0,
            b: 0.0,
            validation_nll: f64::NAN,
        }
    }

    pub fn variance(&self, u: f64) -> f64 {
        self.a * u + self.b
    }
}

/// Slope clamped to [0, 10] for histograms.
pub fn capped_slope(a: f64) -> f64 {
    a.clamp(0.0, 10.0)
}

/// NLL of `a * U + b` on a set, or infinity if any variance falls below the
/// floor.
pub fn calibration_nll(residuals: &[f64], u: &[f64], a: f64, b: f64) -> f64 {
    let mut v = Vec::with_capacity(u.len());
    for &x in u {
        let s = a * x + b;
        if !(s >= VARIANCE_FLOOR) {
            return f64::INFINITY;
        }
        v.push(s);
    }
    gaussian_nll(residuals, &v).unwrap_or(f64::INFINITY)
}

/// Calibrated NLL on a test set. Variances below the floor are clamped to it
/// with a warning.
pub fn cnll(ps: &PredictionSet, params: &CalibrationParams) -> Result<f64, EvalError> {
    let mut clamped = 0;
    let v: Vec<f64> = ps
        .uncertainties
        .iter()
        .map(|&u| {
            let s = params.variance(u);
            if s >= VARIANCE_FLOOR {
                s
            } else {
                clamped += 1;
                VARIANCE_FLOOR
            }
        })
        .collect();
    if clamped > 0 {
        log::warn!(
            "{} {}: {clamped} calibrated variances clamped to {VARIANCE_FLOOR}",
            ps.estimator,
            ps.split
        );
    }
    gaussian_nll(&ps.residuals(), &v)
}

/// Fit `(a, b)` minimising validation NLL of `a * U + b`.
///
/// Nelder-Mead runs from five starts, including the identity map and the
/// constant residual variance, in coordinates scaled so that both
/// parameters are of order one. The best point over all starts is returned.
pub fn fit_calibration(val: &PredictionSet) -> Result<CalibrationParams, EvalError> {
    let n = val.len();
    if n < MIN_CALIBRATION {
        return Err(EvalError::TooFew {
            n,
            min: MIN_CALIBRATION,
        });
    }
    let r = val.residuals();
    let u = &val.uncertainties;
    let mean_r = r.iter().sum::<f64>() / n as f64;
    let var_r = r.iter().map(|x| (x - mean_r).powi(2)).sum::<f64>() / n as f64;
    let s2 = {
        let m = r.iter().map(|x| x * x).sum::<f64>() / n as f64;
        if m > VARIANCE_FLOOR {
            m
        } else {
            1.0
        }
    };
    let su = {
        let m = u.iter().sum::<f64>() / n as f64;
        if m > 0.0 {
            m
        } else {
            1.0
        }
    };
    let ka = s2 / su;
    let to_ab = |x: [f64; 2]| (x[0] * ka, x[1] * s2);
    let f = |x: [f64; 2]| {
        let (a, b) = to_ab(x);
        calibration_nll(&r, u, a, b)
    };

    let starts = [
        [1.0 / ka, 0.0],
        [0.0, var_r / s2],
        [1.0, 0.0],
        [0.5, 0.5],
        [2.0, 0.1],
    ];
    let mut best: Option<([f64; 2], f64)> = None;
    for x0 in starts {
        if !f(x0).is_finite() {
            continue;
        }
        let (x, fx) = minimize(&f, x0);
        if best.is_none_or(|(_, fb)| fx < fb) {
            best = Some((x, fx));
        }
    }
    let (x, fx) = best.ok_or(EvalError::Infeasible)?;
    let (a, b) = to_ab(x);
    Ok(CalibrationParams {
        a,
        b,
        validation_nll: fx,
    })
}

// --- Nelder-Mead on two variables

fn minimize(f: &impl Fn([f64; 2]) -> f64, x0: [f64; 2]) -> ([f64; 2], f64) {
    let mut x = x0;
    let mut fx = f(x0);
    // Restart from the best point until a restart no longer helps; guards
    // against a collapsed simplex stalling away from the optimum.
    for _ in 0..8 {
        let (nx, nf) = nelder_mead(f, x, 0.25);
        let gained = fx - nf;
        if nf < fx {
            x = nx;
            fx = nf;
        }
        if !(gained > 1e-13) {
            break;
        }
    }
    (x, fx)
}

fn nelder_mead(f: &impl Fn([f64; 2]) -> f64, x0: [f64; 2], step: f64) -> ([f64; 2], f64) {
    let add =
        |p: [f64; 2], q: [f64; 2], t: f64| [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
    let mut s: Vec<([f64; 2], f64)> = [
        x0,
        [x0[0] + step.max(step * x0[0].abs()), x0[1]],
        [x0[0], x0[1] + step.max(step * x0[1].abs())],
    ]
    .into_iter()
    .map(|p| (p, f(p)))
    .collect();
    for _ in 0..4000 {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = (s[2].1 - s[0].1).abs();
        let size = s[1..]
            .iter()
            .map(|(p, _)| (p[0] - s[0].0[0]).abs().max((p[1] - s[0].0[1]).abs()))
            .fold(0.0, f64::max);
        if spread.is_finite() && spread <= 1e-15 * (1.0 + s[0].1.abs()) && size < 1e-10 {
            break;
        }
        let c = [(s[0].0[0] + s[1].0[0]) / 2.0, (s[0].0[1] + s[1].0[1]) / 2.0];
        let worst = s[2];
        let xr = add(c, worst.0, -1.0);
        let fr = f(xr);
        if fr < s[0].1 {
            let xe = add(c, worst.0, -2.0);
            let fe = f(xe);
            s[2] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < s[1].1 {
            s[2] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = add(c, worst.0, -0.5);
                (xc, f(xc))
            } else {
                let xc = add(c, worst.0, 0.5);
                (xc, f(xc))
            };
            if fc < worst.1.min(fr) {
                s[2] = (xc, fc);
            } else {
                let b = s[0].0;
                for v in s.iter_mut().skip(1) {
                    let p = add(b, v.0, 0.5);
                    *v = (p, f(p));
                }
            }
        }
    }
    s.sort_by(|a, b| a.1.total_cmp(&b.1));
    s[0]
}
