//! Stratified, seeded train/validation/test splits.

use serde::{Deserialize, Serialize};

use super::example::DialogueExample;
use crate::error::{Error, Result};
use crate::numeric::SeededStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train: 0.6,
            val: 0.2,
            test: 0.2,
            seed: 17,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("train", self.train),
            ("val", self.val),
            ("test", self.test),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::config(
                    name,
                    format!("fraction {f} must lie in (0, 1)"),
                ));
            }
        }
        let sum = self.train + self.val + self.test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "train",
                format!("fractions sum to {sum}, not 1"),
            ));
        }
        Ok(())
    }
}

/// Splits `n` over `fractions` by largest remainder: floors first, leftovers
/// to the largest fractional parts (earlier part on ties). Every count is
/// within one of its exact share.
fn apportion(n: usize, fractions: [f64; 3]) -> [usize; 3] {
    let exact = fractions.map(|f| n as f64 * f);
    let mut quota = exact.map(|x| x.floor() as usize);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let assigned: usize = quota.iter().sum();
    for &part in order.iter().take(n.saturating_sub(assigned)) {
        quota[part] += 1;
    }
    quota
}

pub type Splits = (
    Vec<DialogueExample>,
    Vec<DialogueExample>,
    Vec<DialogueExample>,
);

/// Disjoint, exhaustive, class-stratified split. Each part keeps the input order.
pub fn split(dataset: &[DialogueExample], spec: &SplitSpec) -> Result<Splits> {
    spec.validate()?;
    let n = dataset.len();
    if n < 3 {
        return Err(Error::contract(format!(
            "cannot split {n} examples three ways"
        )));
    }
    let num_classes = dataset.iter().map(|e| e.label).max().unwrap_or(0) + 1;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, ex) in dataset.iter().enumerate() {
        by_class[ex.label].push(i);
    }
    let root = SeededStream::new(spec.seed, 0x5B117);
    let mut assign = vec![0u8; n];
    for (class, members) in by_class.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let [train_c, val_c, test_c] = apportion(members.len(), [spec.train, spec.val, spec.test]);
        if val_c == 0 || test_c == 0 || train_c == 0 {
            return Err(Error::contract(format!(
                "class {class} ({} examples) would be absent from a split",
                members.len()
            )));
        }
        let mut shuffled = members.clone();
        root.derive(class as u64).shuffle(&mut shuffled);
        for (j, &i) in shuffled.iter().enumerate() {
            assign[i] = if j < val_c {
                1
            } else if j < val_c + test_c {
                2
            } else {
                0
            };
        }
    }
    let mut parts: [Vec<DialogueExample>; 3] = Default::default();
    for (i, ex) in dataset.iter().enumerate() {
        parts[assign[i] as usize].push(ex.clone());
    }
    let [train, val, test] = parts;
    Ok((train, val, test))
}
