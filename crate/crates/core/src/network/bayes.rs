//! Mean-field Gaussian posterior over network parameters.

use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use crate::error::{Error, Result};
use crate::numeric::SeededStream;

pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Inverse of [`softplus`], for initializing scales.
pub fn softplus_inverse(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

/// `KL(N(μ, σ²) ‖ N(0, s²))`.
pub fn gaussian_kl(mu: f64, sigma: f64, prior_scale: f64) -> f64 {
    (prior_scale / sigma).ln() + (sigma * sigma + mu * mu) / (2.0 * prior_scale * prior_scale) - 0.5
}

/// Posterior means share the layout of an ordinary [`Mlp`]; each parameter
/// carries a pre-softplus scale `ρ` with `σ = softplus(ρ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BayesMlp {
    pub mean: Mlp,
    pub rho: Vec<f64>,
    pub prior_scale: f64,
}

impl BayesMlp {
    pub fn new(mean: Mlp, initial_sigma: f64, prior_scale: f64) -> Result<Self> {
        if !(initial_sigma > 0.0 && prior_scale > 0.0) {
            return Err(Error::contract(
                "posterior and prior scales must be positive",
            ));
        }
        let rho = vec![softplus_inverse(initial_sigma); mean.num_params()];
        Ok(Self {
            mean,
            rho,
            prior_scale,
        })
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.rho.iter().map(|&r| softplus(r)).collect()
    }

    /// One weight sample `μ + σ ⊙ ε` and the noise used to draw it.
    pub fn sample(&self, rng: &mut SeededStream) -> Result<(Mlp, Vec<f64>)> {
        let eps: Vec<f64> = (0..self.rho.len()).map(|_| rng.standard_normal()).collect();
        let params = self
            .mean
            .params()
            .iter()
            .zip(&self.rho)
            .zip(&eps)
            .map(|((m, r), e)| m + softplus(*r) * e)
            .collect();
        let net = Mlp::from_params(self.mean.specs().to_vec(), params)?;
        Ok((net, eps))
    }

    pub fn kl(&self) -> f64 {
        self.mean
            .params()
            .iter()
            .zip(&self.rho)
            .map(|(m, r)| gaussian_kl(*m, softplus(*r), self.prior_scale))
            .sum()
    }

    /// Gradient of `kl()` with respect to `(μ, ρ)`.
    pub fn kl_grad(&self) -> (Vec<f64>, Vec<f64>) {
        let s2 = self.prior_scale * self.prior_scale;
        let dmu = self.mean.params().iter().map(|m| m / s2).collect();
        let drho = self
            .rho
            .iter()
            .map(|&r| {
                let sigma = softplus(r);
                (-1.0 / sigma + sigma / s2) * sigmoid(r)
            })
            .collect();
        (dmu, drho)
    }

    /// Maps a gradient with respect to sampled weights back onto `(μ, ρ)`.
    pub fn chain(&self, weight_grad: &[f64], eps: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let dmu = weight_grad.to_vec();
        let drho = weight_grad
            .iter()
            .zip(eps)
            .zip(&self.rho)
            .map(|((g, e), r)| g * e * sigmoid(*r))
            .collect();
        (dmu, drho)
    }
}
