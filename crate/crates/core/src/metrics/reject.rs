//! Reject option: metrics over the predictions whose confidence clears a threshold.

use serde::{Deserialize, Serialize};

use super::classification::accuracy_f1;
use crate::methods::PredictionRecord;

/// Thresholds used by default (50% and 80%).
pub const DEFAULT_THRESHOLDS: [f64; 2] = [0.5, 0.8];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectPoint {
    pub threshold: f64,
    pub retained: usize,
    pub coverage: f64,
    /// `None` when nothing is retained.
    pub accuracy: Option<f64>,
    pub f1: Option<f64>,
}

pub fn reject_sweep(records: &[PredictionRecord], thresholds: &[f64]) -> Vec<RejectPoint> {
    thresholds
        .iter()
        .map(|&tau| {
            let kept: Vec<PredictionRecord> = records
                .iter()
                .filter(|r| r.confidence >= tau)
                .cloned()
                .collect();
            let coverage = if records.is_empty() {
                0.0
            } else {
                kept.len() as f64 / records.len() as f64
            };
            let (accuracy, f1) = match accuracy_f1(&kept) {
                Ok((a, f)) => (Some(a), Some(f)),
                Err(_) => (None, None),
            };
            RejectPoint {
                threshold: tau,
                retained: kept.len(),
                coverage,
                accuracy,
                f1,
            }
        })
        .collect()
}
