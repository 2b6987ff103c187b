//! AUROC and AUPRC with tie groups.

use std::cmp::Ordering;

use crate::error::{Error, Result};

fn check(scores: &[f64], positives: &[bool]) -> Result<()> {
    if scores.len() != positives.len() {
        return Err(Error::contract("score and label lengths differ"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::contract("NaN score"));
    }
    Ok(())
}

/// Runs of equal scores in the given order: `(positives, negatives)` per run.
fn tie_groups(scores: &[f64], positives: &[bool], descending: bool) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        let o = scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal);
        if descending {
            o.reverse()
        } else {
            o
        }
    });
    let mut groups = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut pos, mut neg) = (0, 0);
        while i < order.len() && scores[order[i]] == s {
            if positives[order[i]] {
                pos += 1;
            } else {
                neg += 1;
            }
            i += 1;
        }
        groups.push((pos, neg));
    }
    groups
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half (Mann–Whitney).
pub fn auroc(scores: &[f64], positives: &[bool]) -> Result<f64> {
    check(scores, positives)?;
    let p = positives.iter().filter(|x| **x).count();
    let n = positives.len() - p;
    if p == 0 || n == 0 {
        return Err(Error::contract(
            "AUROC needs at least one positive and one negative",
        ));
    }
    let mut pairs = 0.0;
    let mut neg_below = 0.0;
    for (gp, gn) in tie_groups(scores, positives, false) {
        pairs += gp as f64 * neg_below + 0.5 * gp as f64 * gn as f64;
        neg_below += gn as f64;
    }
    Ok(pairs / (p as f64 * n as f64))
}

/// Average precision: precision after each descending tie group, weighted by
/// the recall that group adds.
pub fn auprc(scores: &[f64], positives: &[bool]) -> Result<f64> {
    check(scores, positives)?;
    let p = positives.iter().filter(|x| **x).count();
    if p == 0 {
        return Err(Error::contract("AUPRC needs at least one positive"));
    }
    let (mut tp, mut fp, mut ap) = (0usize, 0usize, 0.0);
    for (gp, gn) in tie_groups(scores, positives, true) {
        tp += gp;
        fp += gn;
        if gp > 0 {
            ap += tp as f64 / (tp + fp) as f64 * (gp as f64 / p as f64);
        }
    }
    Ok(ap)
}
