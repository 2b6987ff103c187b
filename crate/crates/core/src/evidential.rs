//! Dirichlet-head mathematics.
//!
//! A network emits positive concentrations `α` through an exponential output
//! activation. The predictive distribution is the Dirichlet mean `α / α₀`, the
//! training objective is the closed-form Bayes risk of the squared error under
//! `Dir(α)` plus `λ` times a KL regulariser toward the one-hot target.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{digamma, trigamma, SimplexVector};

/// Default regulariser weight.
pub const DEFAULT_LAMBDA: f64 = 0.5;

/// Floor applied inside logarithms.
pub const LOG_CLAMP: f64 = 1e-12;

/// Positive Dirichlet concentrations with their cached sum.
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletParams {
    alpha: Vec<f64>,
    alpha0: f64,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::domain(format!(
                "Dirichlet needs at least two classes, got {}",
                alpha.len()
            )));
        }
        if let Some(bad) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::domain(format!(
                "concentration must be positive and finite, got {bad}"
            )));
        }
        let alpha0 = alpha.iter().sum();
        Ok(Self { alpha, alpha0 })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn num_classes(&self) -> usize {
        self.alpha.len()
    }
}

/// A class index expanded lazily into a one-hot vector of length `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OneHotTarget {
    class_index: usize,
    num_classes: usize,
}

impl OneHotTarget {
    pub fn new(class_index: usize, num_classes: usize) -> Result<Self> {
        if class_index >= num_classes {
            return Err(Error::contract(format!(
                "class index {class_index} out of range for {num_classes} classes"
            )));
        }
        Ok(Self {
            class_index,
            num_classes,
        })
    }

    pub fn class_index(&self) -> usize {
        self.class_index
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn get(&self, k: usize) -> f64 {
        if k == self.class_index {
            1.0
        } else {
            0.0
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.num_classes).map(|k| self.get(k)).collect()
    }
}

/// Which reading of the KL regulariser to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlVariant {
    /// `KL[t ‖ α/α₀] = −ln(α_c/α₀)`.
    #[default]
    Mean,
    /// `E_{π∼Dir(α)}[−ln π_c] = ψ(α₀) − ψ(α_c)`.
    ExpectedLog,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossBreakdown {
    pub bayes_risk: f64,
    pub kl_term: f64,
    pub total: f64,
    pub lambda: f64,
}

fn check_dims(alpha: &DirichletParams, target: &OneHotTarget) -> Result<()> {
    if alpha.num_classes() != target.num_classes() {
        return Err(Error::contract(format!(
            "concentration has {} classes but target has {}",
            alpha.num_classes(),
            target.num_classes()
        )));
    }
    Ok(())
}

/// Dirichlet mean `π̂_k = α_k / α₀`.
pub fn predictive_distribution(alpha: &DirichletParams) -> SimplexVector {
    let weights: Vec<f64> = alpha.alpha().iter().map(|a| a / alpha.alpha0()).collect();
    SimplexVector::normalize(&weights).expect("positive concentrations always normalize")
}

/// Predicted class and its probability; ties go to the lowest index.
pub fn confidence(pi_hat: &SimplexVector) -> (usize, f64) {
    pi_hat.argmax()
}

/// `E‖t − π‖²` under `π ∼ Dir(α)`.
pub fn bayes_risk_loss(alpha: &DirichletParams, target: &OneHotTarget) -> Result<f64> {
    check_dims(alpha, target)?;
    let s = alpha.alpha0();
    let mut loss = 0.0;
    for (k, &a) in alpha.alpha().iter().enumerate() {
        let p = a / s;
        let err = target.get(k) - p;
        loss += err * err + p * (1.0 - p) / (s + 1.0);
    }
    Ok(loss)
}

/// Analytic gradient of [`bayes_risk_loss`] with respect to `α`.
pub fn bayes_risk_grad(alpha: &DirichletParams, target: &OneHotTarget) -> Result<Vec<f64>> {
    check_dims(alpha, target)?;
    let s = alpha.alpha0();
    let p: Vec<f64> = alpha.alpha().iter().map(|a| a / s).collect();
    // dL/dp_k with α₀ held fixed, plus the explicit α₀ dependence of the
    // variance term; dp_k/dα_j = (δ_kj − p_k)/α₀.
    let dl_dp: Vec<f64> = p
        .iter()
        .enumerate()
        .map(|(k, &pk)| -2.0 * (target.get(k) - pk) + (1.0 - 2.0 * pk) / (s + 1.0))
        .collect();
    let weighted: f64 = dl_dp.iter().zip(&p).map(|(g, pk)| g * pk).sum();
    let var_sum: f64 = p.iter().map(|pk| pk * (1.0 - pk)).sum();
    let explicit = -var_sum / ((s + 1.0) * (s + 1.0));
    Ok(dl_dp
        .iter()
        .map(|g| (g - weighted) / s + explicit)
        .collect())
}

/// KL regulariser (mean reading) and its gradient.
pub fn kl_regulariser(alpha: &DirichletParams, target: &OneHotTarget) -> Result<(f64, Vec<f64>)> {
    kl_regulariser_with(alpha, target, KlVariant::Mean)
}

pub fn kl_regulariser_with(
    alpha: &DirichletParams,
    target: &OneHotTarget,
    variant: KlVariant,
) -> Result<(f64, Vec<f64>)> {
    check_dims(alpha, target)?;
    let s = alpha.alpha0();
    let c = target.class_index();
    let ac = alpha.alpha()[c];
    match variant {
        KlVariant::Mean => {
            let p = ac / s;
            if p < LOG_CLAMP {
                return Ok((-LOG_CLAMP.ln(), vec![0.0; alpha.num_classes()]));
            }
            let grad = (0..alpha.num_classes())
                .map(|j| if j == c { 1.0 / s - 1.0 / ac } else { 1.0 / s })
                .collect();
            Ok((-p.ln(), grad))
        }
        KlVariant::ExpectedLog => {
            let value = digamma(s)? - digamma(ac)?;
            let ts = trigamma(s)?;
            let tc = trigamma(ac)?;
            let grad = (0..alpha.num_classes())
                .map(|j| if j == c { ts - tc } else { ts })
                .collect();
            Ok((value.max(0.0), grad))
        }
    }
}

/// Bayes risk plus `λ · KL`.
pub fn total_loss(
    alpha: &DirichletParams,
    target: &OneHotTarget,
    lambda: f64,
) -> Result<LossBreakdown> {
    total_loss_with_grad(alpha, target, lambda, KlVariant::Mean).map(|(b, _)| b)
}

/// Total loss and its gradient with respect to `α`.
pub fn total_loss_with_grad(
    alpha: &DirichletParams,
    target: &OneHotTarget,
    lambda: f64,
    variant: KlVariant,
) -> Result<(LossBreakdown, Vec<f64>)> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::contract(format!(
            "lambda must be non-negative, got {lambda}"
        )));
    }
    let bayes_risk = bayes_risk_loss(alpha, target)?;
    let mut grad = bayes_risk_grad(alpha, target)?;
    let (kl_term, kl_grad) = kl_regulariser_with(alpha, target, variant)?;
    for (g, k) in grad.iter_mut().zip(&kl_grad) {
        *g += lambda * k;
    }
    let breakdown = LossBreakdown {
        bayes_risk,
        kl_term,
        total: bayes_risk + lambda * kl_term,
        lambda,
    };
    Ok((breakdown, grad))
}
