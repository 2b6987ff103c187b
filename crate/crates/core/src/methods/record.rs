use serde::{Deserialize, Serialize};

use crate::numeric::SimplexVector;

/// One prediction: the predictive distribution, its argmax and confidence,
/// and whether it matched the label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub method: String,
    pub seed: u64,
    pub pi_hat: SimplexVector,
    pub predicted_class: usize,
    pub confidence: f64,
    pub true_class: usize,
    pub correct: bool,
}

impl PredictionRecord {
    pub fn new(
        id: impl Into<String>,
        method: impl Into<String>,
        seed: u64,
        pi_hat: SimplexVector,
        true_class: usize,
    ) -> Self {
        let (predicted_class, confidence) = pi_hat.argmax();
        Self {
            id: id.into(),
            method: method.into(),
            seed,
            pi_hat,
            predicted_class,
            confidence,
            true_class,
            correct: predicted_class == true_class,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.pi_hat.len()
    }

    /// The same prediction with its confidence replaced (e.g. after calibration).
    pub fn with_confidence(&self, confidence: f64) -> Self {
        Self {
            confidence,
            ..self.clone()
        }
    }
}

pub fn confidences(records: &[PredictionRecord]) -> Vec<f64> {
    records.iter().map(|r| r.confidence).collect()
}

pub fn correctness(records: &[PredictionRecord]) -> Vec<bool> {
    records.iter().map(|r| r.correct).collect()
}
