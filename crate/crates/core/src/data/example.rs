use crate::error::{Error, Result};

/// A dialogue: `T` sentence vectors of dimension `d` plus its class label.
#[derive(Clone, Debug, PartialEq)]
pub struct DialogueExample {
    pub id: String,
    pub features: Vec<Vec<f64>>,
    pub label: usize,
}

impl DialogueExample {
    pub fn new(id: impl Into<String>, features: Vec<Vec<f64>>, label: usize) -> Result<Self> {
        let ex = Self {
            id: id.into(),
            features,
            label,
        };
        ex.validate()?;
        Ok(ex)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || self.id.chars().any(char::is_whitespace) {
            return Err(Error::contract(format!("invalid example id {:?}", self.id)));
        }
        let d = self
            .features
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::contract(format!("example {} has no sentences", self.id)))?;
        if d == 0 {
            return Err(Error::contract(format!(
                "example {} has zero-dimensional features",
                self.id
            )));
        }
        for row in &self.features {
            if row.len() != d {
                return Err(Error::contract(format!(
                    "example {} has ragged features",
                    self.id
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::contract(format!(
                    "example {} has non-finite features",
                    self.id
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Mean of the sentence vectors over time.
    pub fn mean_pool(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim()];
        for row in &self.features {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        let t = self.features.len() as f64;
        acc.iter().map(|a| a / t).collect()
    }
}

/// A collection of examples sharing feature dimension and class count.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Dataset {
    pub dim: usize,
    pub num_classes: usize,
    pub examples: Vec<DialogueExample>,
}

impl Dataset {
    pub fn new(dim: usize, num_classes: usize, examples: Vec<DialogueExample>) -> Result<Self> {
        let ds = Self {
            dim,
            num_classes,
            examples,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        for ex in &self.examples {
            ex.validate()?;
            if ex.dim() != self.dim {
                return Err(Error::contract(format!(
                    "example {} has dimension {}, dataset has {}",
                    ex.id,
                    ex.dim(),
                    self.dim
                )));
            }
            if ex.label >= self.num_classes {
                return Err(Error::contract(format!(
                    "example {} label {} outside {} classes",
                    ex.id, ex.label, self.num_classes
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for ex in &self.examples {
            counts[ex.label] += 1;
        }
        counts
    }

    pub fn with_examples(&self, examples: Vec<DialogueExample>) -> Self {
        Self {
            dim: self.dim,
            num_classes: self.num_classes,
            examples,
        }
    }
}
