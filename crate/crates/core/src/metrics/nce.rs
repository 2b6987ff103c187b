use crate::error::{Error, Result};

/// Floor on the argument of each cross-entropy logarithm.
pub const NCE_CLAMP: f64 = 1e-7;

/// Normalised cross entropy of confidences against correctness, natural log.
///
/// `(H(c) − H(c, p)) / H(c)` where `H(c)` is `N` times the binary entropy of
/// the correct ratio and `H(c, p)` the summed binary cross-entropy. Only the
/// logarithm a sample actually contributes is clamped, so a confidence of
/// exactly 1 on a correct sample costs nothing.
pub fn nce(confidences: &[f64], correct: &[bool]) -> Result<f64> {
    if confidences.is_empty() || confidences.len() != correct.len() {
        return Err(Error::contract("NCE needs equal-length, non-empty inputs"));
    }
    if let Some(p) = confidences.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::contract(format!("confidence {p} outside [0, 1]")));
    }
    let n = confidences.len() as f64;
    let n_correct = correct.iter().filter(|c| **c).count() as f64;
    if n_correct == 0.0 {
        return Err(Error::UndefinedEntropy("incorrect"));
    }
    if n_correct == n {
        return Err(Error::UndefinedEntropy("correct"));
    }
    let ratio = n_correct / n;
    let entropy = -(n_correct * ratio.ln() + (n - n_correct) * (1.0 - ratio).ln());
    let cross: f64 = confidences
        .iter()
        .zip(correct)
        .map(|(&p, &c)| {
            if c {
                -p.max(NCE_CLAMP).ln()
            } else {
                -(1.0 - p).max(NCE_CLAMP).ln()
            }
        })
        .sum();
    Ok((entropy - cross) / entropy)
}
