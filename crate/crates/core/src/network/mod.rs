//! Feed-forward classifier, optimizer and learning-rate schedule.

mod bayes;
mod mlp;
mod optim;

pub use bayes::{gaussian_kl, sigmoid, softplus, softplus_inverse, BayesMlp};
pub use mlp::{build_specs, softmax, Activation, LayerSpec, Mlp, Mode, Tape};
pub use optim::{adamw_step, noam_lr, AdamWConfig, OptimizerState, ScheduleConfig};
