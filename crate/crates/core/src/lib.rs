//! Evidential (Dirichlet) classifiers, Bayesian baselines and confidence
//! calibration metrics for dialogue-level classification.

pub mod calibration;
pub mod cli;
pub mod data;
pub mod error;
pub mod evidential;
pub mod methods;
pub mod metrics;
pub mod network;
pub mod numeric;
pub mod par;
pub mod table;

pub use error::{Error, Result};
