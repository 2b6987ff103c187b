//! Piece-wise linear confidence mapping fitted on validation predictions.
//!
//! Validation confidences are binned over `[1/K, 1]`; each non-empty bin
//! contributes a knot at (mean confidence, accuracy). Adjacent violators are
//! pooled with count weights so the knot heights never decrease, and the
//! first and last heights are extended flat to `1/K` and `1`. Applying the
//! map blends the interpolated value with a tiny multiple of the input, which
//! makes it strictly increasing and therefore rank-preserving.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::methods::PredictionRecord;

pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const PWLM_MAGIC: &str = "dirconf-pwlm";
pub const PWLM_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearMap {
    knots: Vec<(f64, f64)>,
    epsilon: f64,
}

impl PiecewiseLinearMap {
    pub fn new(knots: Vec<(f64, f64)>, epsilon: f64) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::contract(
                "a piece-wise linear map needs at least two knots",
            ));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::contract(format!(
                "blend epsilon {epsilon} outside [0, 1)"
            )));
        }
        for (i, &(x, y)) in knots.iter().enumerate() {
            if !(x.is_finite() && (0.0..=1.0).contains(&y)) {
                return Err(Error::contract(format!(
                    "knot {i} = ({x}, {y}) out of range"
                )));
            }
            if i > 0 {
                let (px, py) = knots[i - 1];
                if x <= px || y < py {
                    return Err(Error::contract(format!(
                        "knot {i} breaks ordering: x must increase strictly, y must not decrease"
                    )));
                }
            }
        }
        Ok(Self { knots, epsilon })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Linear interpolation between knots, flat beyond the end knots.
    pub fn interpolate(&self, p: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if p <= first.0 {
            return first.1;
        }
        if p >= last.0 {
            return last.1;
        }
        let i = self.knots.partition_point(|&(x, _)| x < p);
        let (x0, y0) = self.knots[i - 1];
        let (x1, y1) = self.knots[i];
        let y = y0 + (y1 - y0) * ((p - x0) / (x1 - x0));
        // Keeps segment joins weakly monotone under rounding.
        y.clamp(y0, y1)
    }

    pub fn apply(&self, p: f64) -> f64 {
        ((1.0 - self.epsilon) * self.interpolate(p) + self.epsilon * p).clamp(0.0, 1.0)
    }

    pub fn apply_records(&self, records: &[PredictionRecord]) -> Vec<PredictionRecord> {
        records
            .iter()
            .map(|r| r.with_confidence(self.apply(r.confidence)))
            .collect()
    }

    pub fn to_text(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{PWLM_MAGIC} {PWLM_VERSION}");
        let _ = writeln!(out, "epsilon {:?}", self.epsilon);
        let _ = writeln!(out, "knots {}", self.knots.len());
        for (x, y) in &self.knots {
            let _ = writeln!(out, "{x:?} {y:?}");
        }
        out
    }

    pub fn from_text(text: &str, source: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| {
                Error::parse(source, text.lines().count() + 1, format!("missing {what}"))
            })
        };
        let (ln, header) = next("header")?;
        if header.split_whitespace().collect::<Vec<_>>() != [PWLM_MAGIC, &PWLM_VERSION.to_string()]
        {
            return Err(Error::parse(
                source,
                ln + 1,
                format!("expected `{PWLM_MAGIC} {PWLM_VERSION}`"),
            ));
        }
        let (ln, eps_line) = next("epsilon")?;
        let epsilon = keyed(eps_line, "epsilon", source, ln)?
            .parse::<f64>()
            .map_err(|e| Error::parse(source, ln + 1, e.to_string()))?;
        let (ln, count_line) = next("knot count")?;
        let count = keyed(count_line, "knots", source, ln)?
            .parse::<usize>()
            .map_err(|e| Error::parse(source, ln + 1, e.to_string()))?;
        let mut knots = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, line) = next("knot")?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e: std::num::ParseFloatError| {
                    Error::parse(source, ln + 1, e.to_string())
                })?;
            if vals.len() != 2 {
                return Err(Error::parse(source, ln + 1, "knot line needs two numbers"));
            }
            knots.push((vals[0], vals[1]));
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::parse(source, ln + 1, "trailing content after knots"));
        }
        Self::new(knots, epsilon)
    }

    pub fn save(&self, path: &Path, comments: &[String]) -> Result<()> {
        std::fs::write(path, self.to_text(comments)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, &path.display().to_string())
    }
}

fn keyed<'a>(line: &'a str, key: &str, source: &str, ln: usize) -> Result<&'a str> {
    match line.split_once(' ') {
        Some((k, v)) if k == key => Ok(v.trim()),
        _ => Err(Error::parse(
            source,
            ln + 1,
            format!("expected `{key} <value>`"),
        )),
    }
}

/// Fits a map from records with `num_classes` classes.
pub fn fit_pwlm(records: &[PredictionRecord], num_bins: usize) -> Result<PiecewiseLinearMap> {
    let first = records
        .first()
        .ok_or_else(|| Error::contract("cannot fit a calibration map on no records"))?;
    let k = first.num_classes();
    let conf: Vec<f64> = records.iter().map(|r| r.confidence).collect();
    let correct: Vec<bool> = records.iter().map(|r| r.correct).collect();
    fit_pwlm_scores(&conf, &correct, k, num_bins)
}

/// Fits a map from raw confidences on `[1/K, 1]`.
pub fn fit_pwlm_scores(
    confidences: &[f64],
    correct: &[bool],
    num_classes: usize,
    num_bins: usize,
) -> Result<PiecewiseLinearMap> {
    if confidences.is_empty() {
        return Err(Error::contract(
            "cannot fit a calibration map on no records",
        ));
    }
    if confidences.len() != correct.len() {
        return Err(Error::contract("confidence and correctness lengths differ"));
    }
    if num_classes < 2 {
        return Err(Error::contract("calibration needs at least two classes"));
    }
    if num_bins == 0 {
        return Err(Error::contract("num_bins must be positive"));
    }
    let lo = 1.0 / num_classes as f64;
    let width = (1.0 - lo) / num_bins as f64;
    // (sum of confidences, hits, count) per bin.
    let mut bins = vec![(0.0, 0.0, 0usize); num_bins];
    for (&p, &c) in confidences.iter().zip(correct) {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::contract(format!("confidence {p} outside [0, 1]")));
        }
        let b = (((p - lo) / width).floor().max(0.0) as usize).min(num_bins - 1);
        bins[b].0 += p;
        bins[b].1 += f64::from(u8::from(c));
        bins[b].2 += 1;
    }
    // Pool adjacent violators; each block holds (conf sum, hits, count).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
    for bin in bins.into_iter().filter(|b| b.2 > 0) {
        blocks.push(bin);
        while blocks.len() > 1 {
            let n = blocks.len();
            let (a, b) = (blocks[n - 2], blocks[n - 1]);
            if a.1 / a.2 as f64 <= b.1 / b.2 as f64 {
                break;
            }
            blocks.truncate(n - 2);
            blocks.push((a.0 + b.0, a.1 + b.1, a.2 + b.2));
        }
    }
    let mut knots: Vec<(f64, f64)> = blocks
        .iter()
        .map(|&(s, h, n)| (s / n as f64, h / n as f64))
        .collect();
    let (x0, y0) = knots[0];
    if x0 > lo {
        knots.insert(0, (lo, y0));
    }
    let (xn, yn) = knots[knots.len() - 1];
    if xn < 1.0 {
        knots.push((1.0, yn));
    }
    if knots.len() < 2 {
        // Every confidence sits exactly at an endpoint that equals the other.
        knots = vec![(lo, y0), (1.0, y0)];
    }
    PiecewiseLinearMap::new(knots, DEFAULT_EPSILON)
}
