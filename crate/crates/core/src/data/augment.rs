//! Sub-dialogue shuffling: contiguous sentence spans drawn from a dialogue.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::example::DialogueExample;
use crate::error::{Error, Result};
use crate::numeric::SeededStream;

/// Sub-dialogues per positive dialogue used for the two clinical corpora.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentPreset {
    Adress,
    Daicwoz,
}

impl AugmentPreset {
    pub fn per_positive_sample(self) -> usize {
        match self {
            AugmentPreset::Adress => 100,
            AugmentPreset::Daicwoz => 500,
        }
    }
}

impl std::str::FromStr for AugmentPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adress" => Ok(Self::Adress),
            "daicwoz" => Ok(Self::Daicwoz),
            other => Err(Error::config(
                "preset",
                format!("unknown augmentation preset {other:?}"),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    /// Overrides `per_positive` when set.
    pub preset: Option<AugmentPreset>,
    /// Sub-dialogues per positive dialogue; 0 leaves positives untouched.
    pub per_positive: usize,
    pub positive_class: usize,
    /// Also resample the other classes up to the positive total.
    pub balance: bool,
    pub min_len: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            preset: None,
            per_positive: 0,
            positive_class: 1,
            balance: false,
            min_len: 1,
        }
    }
}

impl AugmentConfig {
    pub fn per_positive_sample(&self) -> usize {
        self.preset
            .map_or(self.per_positive, AugmentPreset::per_positive_sample)
    }

    /// Target number of examples per class for `train`.
    pub fn class_totals(
        &self,
        train: &[DialogueExample],
        num_classes: usize,
    ) -> BTreeMap<usize, usize> {
        let mut counts = vec![0usize; num_classes];
        for ex in train {
            counts[ex.label] += 1;
        }
        let per = self.per_positive_sample();
        let positive_total = if per == 0 {
            counts[self.positive_class]
        } else {
            per * counts[self.positive_class]
        };
        counts
            .iter()
            .enumerate()
            .map(|(class, &n)| {
                let target = if class == self.positive_class || self.balance {
                    positive_total
                } else {
                    n
                };
                (class, target)
            })
            .collect()
    }
}

/// Draws `(s, e)`, 1-based and inclusive, with `s` uniform over valid starts
/// and `e` uniform over `[s + min_len − 1, len]`.
pub fn sample_span(len: usize, min_len: usize, rng: &mut SeededStream) -> Result<(usize, usize)> {
    if min_len < 1 || min_len > len {
        return Err(Error::contract(format!(
            "minimum span length {min_len} invalid for a dialogue of {len} sentences"
        )));
    }
    let s = rng.int_inclusive(1, len - min_len + 1);
    let e = rng.int_inclusive(s + min_len - 1, len);
    Ok((s, e))
}

pub fn sub_dialogue_shuffle(
    example: &DialogueExample,
    count: usize,
    min_len: usize,
    rng: &mut SeededStream,
) -> Result<Vec<DialogueExample>> {
    if min_len < 1 || min_len > example.len() {
        return Err(Error::contract(format!(
            "min_len {min_len} exceeds the {} sentences of {}",
            example.len(),
            example.id
        )));
    }
    (0..count)
        .map(|i| {
            let (s, e) = sample_span(example.len(), min_len, rng)?;
            Ok(DialogueExample {
                id: format!("{}~{i}", example.id),
                features: example.features[s - 1..e].to_vec(),
                label: example.label,
            })
        })
        .collect()
}

/// Replaces the members of each class listed in `class_totals` by
/// sub-dialogues so the class holds exactly its target count. Classes whose
/// target equals their current size, and classes not listed, are untouched.
pub fn balance_augment(
    train: &[DialogueExample],
    class_totals: &BTreeMap<usize, usize>,
    min_len: usize,
    rng: &SeededStream,
) -> Result<Vec<DialogueExample>> {
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, ex) in train.iter().enumerate() {
        members.entry(ex.label).or_default().push(i);
    }
    let mut per_example: Vec<Option<usize>> = vec![None; train.len()];
    for (&class, &target) in class_totals {
        let idx = members
            .get(&class)
            .ok_or_else(|| Error::contract(format!("class {class} has no training examples")))?;
        if target == idx.len() {
            continue;
        }
        let base = target / idx.len();
        let extra = target % idx.len();
        for (j, &i) in idx.iter().enumerate() {
            per_example[i] = Some(base + usize::from(j < extra));
        }
    }
    let mut out = Vec::new();
    for (i, ex) in train.iter().enumerate() {
        match per_example[i] {
            None => out.push(ex.clone()),
            Some(n) => {
                let mut local = rng.derive(i as u64);
                out.extend(sub_dialogue_shuffle(
                    ex,
                    n,
                    min_len.min(ex.len()),
                    &mut local,
                )?);
            }
        }
    }
    Ok(out)
}
