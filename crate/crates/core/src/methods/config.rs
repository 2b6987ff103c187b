use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidential::{KlVariant, DEFAULT_LAMBDA};
use crate::network::{AdamWConfig, ScheduleConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Evidential,
    L2,
    Mcdp,
    Bbb,
    Ensemble,
}

impl MethodKind {
    pub const ALL: [MethodKind; 5] = [
        MethodKind::Evidential,
        MethodKind::L2,
        MethodKind::Mcdp,
        MethodKind::Bbb,
        MethodKind::Ensemble,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Evidential => "evidential",
            MethodKind::L2 => "l2",
            MethodKind::Mcdp => "mcdp",
            MethodKind::Bbb => "bbb",
            MethodKind::Ensemble => "ensemble",
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config("methods", format!("unknown method `{s}`")))
    }
}

/// How the BBB KL term is weighted per mini-batch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlWeightMode {
    /// `1 / M` for `M` mini-batches per epoch.
    #[default]
    InverseBatches,
    /// `2^(M−i) / (2^M − 1)` for the `i`-th mini-batch (1-based).
    Geometric,
}

impl KlWeightMode {
    pub fn weight(self, batch_index: usize, num_batches: usize) -> f64 {
        match self {
            KlWeightMode::InverseBatches => 1.0 / num_batches as f64,
            KlWeightMode::Geometric => {
                let m = num_batches as i32;
                let i = batch_index as i32 + 1;
                2f64.powi(m - i) / (2f64.powi(m) - 1.0)
            }
        }
    }
}

/// Per-method hyperparameters; fields that do not apply to a method are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodConfig {
    pub method: MethodKind,
    pub lambda: f64,
    pub kl_variant: KlVariant,
    pub dropout_rate: f64,
    pub test_samples: usize,
    pub ensemble_size: usize,
    pub prior_scale: f64,
    pub initial_sigma: f64,
    pub kl_weight_mode: KlWeightMode,
    /// Decoupled weight decay; `None` picks 0.01 for L2 and ensemble, 0 otherwise.
    pub weight_decay: Option<f64>,
    pub seed: u64,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self::new(MethodKind::Evidential, 1)
    }
}

impl MethodConfig {
    pub fn new(method: MethodKind, seed: u64) -> Self {
        Self {
            method,
            lambda: DEFAULT_LAMBDA,
            kl_variant: KlVariant::default(),
            dropout_rate: 0.3,
            test_samples: 50,
            ensemble_size: 5,
            prior_scale: 1.0,
            initial_sigma: 0.01,
            kl_weight_mode: KlWeightMode::default(),
            weight_decay: None,
            seed,
        }
    }

    pub fn effective_weight_decay(&self) -> f64 {
        self.weight_decay.unwrap_or(match self.method {
            MethodKind::L2 | MethodKind::Ensemble => 0.01,
            _ => 0.0,
        })
    }

    /// Dropout used during training; only MCDP trains with dropout.
    pub fn effective_dropout(&self) -> f64 {
        if self.method == MethodKind::Mcdp {
            self.dropout_rate
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::config("lambda", "must be a non-negative number"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::config("dropout_rate", "must lie in [0, 1)"));
        }
        if self.test_samples < 1 {
            return Err(Error::config("test_samples", "must be at least 1"));
        }
        if self.ensemble_size < 1 {
            return Err(Error::config("ensemble_size", "must be at least 1"));
        }
        if !(self.prior_scale > 0.0 && self.prior_scale.is_finite()) {
            return Err(Error::config("prior_scale", "must be positive"));
        }
        if !(self.initial_sigma > 0.0 && self.initial_sigma.is_finite()) {
            return Err(Error::config("initial_sigma", "must be positive"));
        }
        if let Some(wd) = self.weight_decay {
            if !(wd >= 0.0 && wd.is_finite()) {
                return Err(Error::config("weight_decay", "must be non-negative"));
            }
        }
        Ok(())
    }
}

/// Which epoch's parameters a training run returns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Highest validation F1, ties to lower validation loss, then earlier epoch.
    #[default]
    BestValidation,
    Last,
}

/// Optimisation settings shared by every method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub warmup_steps: u64,
    pub peak_lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub selection: Selection,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: vec![128, 128],
            epochs: 30,
            batch_size: 32,
            warmup_steps: 50,
            peak_lr: 2e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            selection: Selection::default(),
        }
    }
}

impl TrainConfig {
    pub fn schedule(&self) -> Result<ScheduleConfig> {
        ScheduleConfig::new(self.warmup_steps, self.peak_lr)
            .map_err(|e| Error::config("train.peak_lr", e.to_string()))
    }

    pub fn adam(&self, weight_decay: f64) -> AdamWConfig {
        AdamWConfig {
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.adam_epsilon,
            weight_decay,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden.contains(&0) {
            return Err(Error::config("hidden", "layer widths must be positive"));
        }
        if self.epochs == 0 {
            return Err(Error::config("epochs", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be at least 1"));
        }
        if self.warmup_steps == 0 {
            return Err(Error::config("warmup_steps", "must be at least 1"));
        }
        if !(self.peak_lr > 0.0 && self.peak_lr.is_finite()) {
            return Err(Error::config("peak_lr", "must be positive"));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::config(name, "must lie in [0, 1)"));
            }
        }
        if self.adam_epsilon.is_nan() || self.adam_epsilon <= 0.0 {
            return Err(Error::config("adam_epsilon", "must be positive"));
        }
        Ok(())
    }
}
