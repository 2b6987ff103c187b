use crate::error::{Error, Result};
use crate::methods::PredictionRecord;

/// Label treated as the positive class for F1.
pub const POSITIVE_CLASS: usize = 1;

/// Accuracy and positive-class F1; F1 is 0 when its denominator vanishes.
pub fn accuracy_f1(records: &[PredictionRecord]) -> Result<(f64, f64)> {
    let preds: Vec<usize> = records.iter().map(|r| r.predicted_class).collect();
    let truth: Vec<usize> = records.iter().map(|r| r.true_class).collect();
    accuracy_f1_labels(&preds, &truth)
}

pub fn accuracy_f1_labels(predicted: &[usize], truth: &[usize]) -> Result<(f64, f64)> {
    if predicted.is_empty() {
        return Err(Error::contract("accuracy of an empty prediction set"));
    }
    if predicted.len() != truth.len() {
        return Err(Error::contract("prediction and label counts differ"));
    }
    let (mut correct, mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &t) in predicted.iter().zip(truth) {
        correct += usize::from(p == t);
        match (p == POSITIVE_CLASS, t == POSITIVE_CLASS) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let acc = correct as f64 / predicted.len() as f64;
    let denom = 2 * tp + fp + fn_;
    let f1 = if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    };
    Ok((acc, f1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_correct() {
        assert_eq!(
            accuracy_f1_labels(&[1, 0, 1], &[1, 0, 1]).unwrap(),
            (1.0, 1.0)
        );
    }

    #[test]
    fn all_negative_predictions() {
        let (_, f1) = accuracy_f1_labels(&[0, 0, 0], &[1, 0, 1]).unwrap();
        assert_eq!(f1, 0.0);
    }

    #[test]
    fn hand_counted_confusion_matrix() {
        // tp=1 fp=1 fn=1 tn=1: precision = recall = 0.5
        assert_eq!(
            accuracy_f1_labels(&[1, 1, 0, 0], &[1, 0, 1, 0]).unwrap(),
            (0.5, 0.5)
        );
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(
            accuracy_f1_labels(&[], &[]),
            Err(Error::Contract(_))
        ));
    }
}
