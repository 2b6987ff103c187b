//! AdamW with decoupled weight decay, and the Noam warmup/decay schedule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub config: AdamWConfig,
    pub step: u64,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
}

impl OptimizerState {
    pub fn new(num_params: usize, config: AdamWConfig) -> Self {
        Self {
            config,
            step: 0,
            first_moment: vec![0.0; num_params],
            second_moment: vec![0.0; num_params],
        }
    }
}

/// One AdamW update in place.
pub fn adamw_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut OptimizerState,
    lr: f64,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.first_moment.len() {
        return Err(Error::contract(format!(
            "parameter/gradient/moment lengths differ: {} / {} / {}",
            params.len(),
            grads.len(),
            state.first_moment.len()
        )));
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::numeric(format!("non-finite gradient at index {i}")));
    }
    let AdamWConfig {
        beta1,
        beta2,
        epsilon,
        weight_decay,
    } = state.config;
    state.step += 1;
    let t = state.step as i32;
    let bias1 = 1.0 - beta1.powi(t);
    let bias2 = 1.0 - beta2.powi(t);
    let decay = 1.0 - lr * weight_decay;
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.first_moment.iter_mut())
        .zip(state.second_moment.iter_mut())
    {
        *p *= decay;
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / bias1;
        let v_hat = *v / bias2;
        *p -= lr * m_hat / (v_hat.sqrt() + epsilon);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub warmup_steps: u64,
    pub peak_lr: f64,
}

impl ScheduleConfig {
    pub const PAPER_WARMUP: u64 = 400;
    pub const PAPER_PEAK_LR: f64 = 4.29e-5;

    pub fn new(warmup_steps: u64, peak_lr: f64) -> Result<Self> {
        let cfg = Self {
            warmup_steps,
            peak_lr,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 400 warm-up steps peaking at 4.29e-5.
    pub fn reference() -> Self {
        Self {
            warmup_steps: Self::PAPER_WARMUP,
            peak_lr: Self::PAPER_PEAK_LR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.warmup_steps < 1 {
            return Err(Error::config("warmup_steps", "must be at least 1"));
        }
        if !(self.peak_lr > 0.0 && self.peak_lr.is_finite()) {
            return Err(Error::config("peak_lr", "must be positive"));
        }
        Ok(())
    }
}

/// `peak · min(step / warmup, sqrt(warmup / step))`.
pub fn noam_lr(step: u64, cfg: &ScheduleConfig) -> Result<f64> {
    if step < 1 {
        return Err(Error::contract("learning-rate schedule steps start at 1"));
    }
    let s = step as f64;
    let w = cfg.warmup_steps as f64;
    Ok(cfg.peak_lr * (s / w).min((w / s).sqrt()))
}
