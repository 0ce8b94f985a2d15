use serde::{Deserialize, Serialize};

use super::linalg::{cholesky, solve_lower, solve_upper_transposed};
use super::{Prediction, ShallowError};
use crate::chem::Fingerprint;

/// Inputs usable with the linear kernel `k(x, x') = prior_variance * <x, x'>`.
pub trait LinearFeatures {
    fn dim(&self) -> usize;
    fn dot(&self, other: &Self) -> f64;
    fn is_finite(&self) -> bool;
}

impl LinearFeatures for Vec<f64> {
    fn dim(&self) -> usize {
        self.len()
    }

    fn dot(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

/// Binary fingerprints: the inner product is the shared on-bit count.
impl LinearFeatures for Fingerprint {
    fn dim(&self) -> usize {
        self.len()
    }

    fn dot(&self, other: &Self) -> f64 {
        self.intersection_count(other) as f64
    }

    fn is_finite(&self) -> bool {
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpParams {
    /// Prior variance of each weight.
    pub prior_variance: f64,
    /// Observation noise variance, included in predictive variances.
    pub noise: f64,
}

impl Default for GpParams {
    fn default() -> Self {
        GpParams {
            prior_variance: 1.0,
            noise: 0.1,
        }
    }
}

/// Exact GP regression with a bias-free linear kernel and zero prior mean.
///
/// Equivalent to Bayesian linear regression with weight prior
/// `N(0, prior_variance * I)` and Gaussian noise; computed in function
/// space through a Cholesky factor of the `n x n` kernel matrix.
#[derive(Clone, Debug)]
pub struct LinearGP<T> {
    inputs: Vec<T>,
    params: GpParams,
    chol: Vec<f64>,
    alpha: Vec<f64>,
}

impl<T: LinearFeatures + Clone> LinearGP<T> {
    pub fn fit(
        inputs: &[T],
        targets: &[f64],
        params: GpParams,
    ) -> Result<LinearGP<T>, ShallowError> {
        let n = inputs.len();
        if n == 0 {
            return Err(ShallowError::TooFewRows { n, min: 1 });
        }
        if targets.len() != n {
            return Err(ShallowError::LengthMismatch {
                inputs: n,
                targets: targets.len(),
            });
        }
        if !(params.noise > 0.0) || !(params.prior_variance > 0.0) {
            return Err(ShallowError::InvalidParameter(format!(
                "noise and prior variance must be positive, got {} and {}",
                params.noise, params.prior_variance
            )));
        }
        let dim = inputs[0].dim();
        if let Some(bad) = inputs.iter().find(|x| x.dim() != dim) {
            return Err(ShallowError::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        if !inputs.iter().all(|x| x.is_finite()) || !targets.iter().all(|y| y.is_finite()) {
            return Err(ShallowError::NonFinite);
        }

        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = params.prior_variance * inputs[i].dot(&inputs[j]);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
            k[i * n + i] += params.noise;
        }
        cholesky(&mut k, n).map_err(|pivot| ShallowError::Singular { pivot })?;
        let alpha = solve_upper_transposed(&k, n, &solve_lower(&k, n, targets));
        Ok(LinearGP {
            inputs: inputs.to_vec(),
            params,
            chol: k,
            alpha,
        })
    }

    pub fn params(&self) -> GpParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn predict(&self, query: &T) -> Result<Prediction, ShallowError> {
        let dim = self.inputs[0].dim();
        if query.dim() != dim {
            return Err(ShallowError::DimensionMismatch {
                expected: dim,
                got: query.dim(),
            });
        }
        let n = self.inputs.len();
        let kstar: Vec<f64> = self
            .inputs
            .iter()
            .map(|x| self.params.prior_variance * x.dot(query))
            .collect();
        let mean = kstar.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let v = solve_lower(&self.chol, n, &kstar);
        let prior = self.params.prior_variance * query.dot(query);
        let latent = (prior - v.iter().map(|x| x * x).sum::<f64>()).max(0.0);
        Ok(Prediction {
            mean,
            variance: latent + self.params.noise,
        })
    }

    pub fn predict_many(&self, queries: &[T]) -> Result<Vec<Prediction>, ShallowError> {
        queries.iter().map(|q| self.predict(q)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_line_through_origin() {
        let x: Vec<Vec<f64>> = vec![vec![1.0], vec![2.0], vec![3.0]];
        let gp = LinearGP::fit(
            &x,
            &[2.0, 4.0, 6.0],
            GpParams {
                prior_variance: 1.0,
                noise: 1e-8,
            },
        )
        .unwrap();
        let p = gp.predict(&vec![4.0]).unwrap();
        assert!((p.mean - 8.0).abs() < 1e-3, "{}", p.mean);
        assert!(p.variance > 0.0);
    }

    #[test]
    fn zero_query_returns_prior() {
        let x: Vec<Vec<f64>> = vec![vec![1.0, 0.5], vec![-0.3, 2.0]];
        let gp = LinearGP::fit(&x, &[1.0, -1.0], GpParams::default()).unwrap();
        let p = gp.predict(&vec![0.0, 0.0]).unwrap();
        assert_eq!(p.mean, 0.0);
        assert_eq!(p.variance, GpParams::default().noise);
    }

    #[test]
    fn errors() {
        let x: Vec<Vec<f64>> = vec![vec![1.0, 0.0]];
        assert!(matches!(
            LinearGP::fit(&x, &[1.0, 2.0], GpParams::default()),
            Err(ShallowError::LengthMismatch { .. })
        ));
        assert!(matches!(
            LinearGP::fit(&[vec![f64::NAN]], &[1.0], GpParams::default()),
            Err(ShallowError::NonFinite)
        ));
        let gp = LinearGP::fit(&x, &[1.0], GpParams::default()).unwrap();
        assert!(matches!(
            gp.predict(&vec![1.0]),
            Err(ShallowError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
        let zero = GpParams {
            prior_variance: 1.0,
            noise: 0.0,
        };
        assert!(LinearGP::fit(&x, &[1.0], zero).is_err());
    }

    #[test]
    fn singular_kernel_reported() {
        // two identical rows and negligible noise
        let x: Vec<Vec<f64>> = vec![vec![1e8], vec![1e8]];
        let p = GpParams {
            prior_variance: 1.0,
            noise: 1e-300,
        };
        assert!(matches!(
            LinearGP::fit(&x, &[1.0, 1.0], p),
            Err(ShallowError::Singular { .. })
        ));
    }

    #[test]
    fn fingerprint_kernel_counts_shared_bits() {
        let a = Fingerprint::from_bits(64, &[1, 2, 3]);
        let b = Fingerprint::from_bits(64, &[2, 3, 4]);
        assert_eq!(a.dot(&b), 2.0);
        let gp = LinearGP::fit(&[a.clone(), b], &[1.0, 0.0], GpParams::default()).unwrap();
        let at_train = gp.predict(&a).unwrap().variance;
        let at_zero = gp.predict(&Fingerprint::empty(64, 3)).unwrap().variance;
        // the bias-free kernel has zero prior variance at the origin
        assert_eq!(at_zero, 0.1);
        assert!(at_train >= at_zero);
    }
}
