//! Gamma and Dirichlet sampling.

use super::rng::SeededStream;
use super::simplex::SimplexVector;
use crate::error::{Error, Result};
use crate::evidential::DirichletParams;

/// Natural log of one Gamma(shape, 1) draw.
///
/// Marsaglia–Tsang squeeze/rejection for shape ≥ 1. Shapes below one draw at
/// `shape + 1` and multiply by `U^(1/shape)`, done in log space so very small
/// shapes do not underflow to zero.
pub fn sample_log_gamma(shape: f64, rng: &mut SeededStream) -> Result<f64> {
    if !(shape.is_finite() && shape > 0.0) {
        return Err(Error::domain(format!(
            "gamma shape must be positive, got {shape}"
        )));
    }
    if shape < 1.0 {
        let boosted = sample_log_gamma(shape + 1.0, rng)?;
        return Ok(boosted + rng.uniform_open0().ln() / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.standard_normal();
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform_open0();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return Ok((d * v).ln());
        }
    }
}

pub fn sample_gamma(shape: f64, rng: &mut SeededStream) -> Result<f64> {
    sample_log_gamma(shape, rng).map(f64::exp)
}

/// One draw from `Dir(alpha)` by normalizing independent Gamma draws.
pub fn sample_dirichlet(alpha: &DirichletParams, rng: &mut SeededStream) -> Result<SimplexVector> {
    let logs = alpha
        .alpha()
        .iter()
        .map(|&a| sample_log_gamma(a, rng))
        .collect::<Result<Vec<_>>>()?;
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    SimplexVector::normalize(&weights)
}
