//! Expected calibration error and reliability-diagram bins.
//!
//! `[0, 1]` is cut into `Q` equal bins, left-open and right-closed except the
//! first: `[0, 1/Q], (1/Q, 2/Q], …, ((Q−1)/Q, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::methods::{confidences, correctness, PredictionRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EceConfig {
    pub num_bins: usize,
}

impl Default for EceConfig {
    fn default() -> Self {
        Self { num_bins: 10 }
    }
}

/// Bin holding `p`. Upper edges are computed as `(b + 1) / Q` so that the
/// assignment agrees exactly with an explicit interval test.
pub fn bin_index(p: f64, num_bins: usize) -> usize {
    let q = num_bins as f64;
    let mut b = ((p * q).ceil() as usize)
        .saturating_sub(1)
        .min(num_bins - 1);
    while b > 0 && p <= b as f64 / q {
        b -= 1;
    }
    while b + 1 < num_bins && p > (b + 1) as f64 / q {
        b += 1;
    }
    b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// `NaN` for empty bins.
    pub mean_confidence: f64,
    /// `NaN` for empty bins.
    pub accuracy: f64,
}

fn check_inputs(conf: &[f64], correct: &[bool], num_bins: usize) -> Result<()> {
    if conf.is_empty() {
        return Err(Error::contract(
            "calibration error of an empty prediction set",
        ));
    }
    if conf.len() != correct.len() {
        return Err(Error::contract("confidence and correctness lengths differ"));
    }
    if num_bins == 0 {
        return Err(Error::contract("need at least one bin"));
    }
    if let Some(p) = conf.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::contract(format!("confidence {p} outside [0, 1]")));
    }
    Ok(())
}

pub fn reliability_bins(
    conf: &[f64],
    correct: &[bool],
    num_bins: usize,
) -> Result<Vec<ReliabilityBin>> {
    check_inputs(conf, correct, num_bins)?;
    let mut count = vec![0usize; num_bins];
    let mut conf_sum = vec![0.0; num_bins];
    let mut hits = vec![0usize; num_bins];
    for (&p, &c) in conf.iter().zip(correct) {
        let b = bin_index(p, num_bins);
        count[b] += 1;
        conf_sum[b] += p;
        hits[b] += usize::from(c);
    }
    let q = num_bins as f64;
    Ok((0..num_bins)
        .map(|b| ReliabilityBin {
            index: b,
            lower: b as f64 / q,
            upper: (b + 1) as f64 / q,
            count: count[b],
            mean_confidence: conf_sum[b] / count[b] as f64,
            accuracy: hits[b] as f64 / count[b] as f64,
        })
        .collect())
}

pub fn ece_scores(conf: &[f64], correct: &[bool], cfg: &EceConfig) -> Result<f64> {
    let bins = reliability_bins(conf, correct, cfg.num_bins)?;
    let n = conf.len() as f64;
    Ok(bins
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| b.count as f64 / n * (b.accuracy - b.mean_confidence).abs())
        .sum())
}

pub fn ece(records: &[PredictionRecord], cfg: &EceConfig) -> Result<f64> {
    ece_scores(&confidences(records), &correctness(records), cfg)
}
