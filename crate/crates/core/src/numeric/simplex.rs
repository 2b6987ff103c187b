use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// A point on the probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    /// Validates that `components` are non-negative and sum to one.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::contract("simplex vector must be non-empty"));
        }
        if components
            .iter()
            .any(|c| !c.is_finite() || *c < 0.0 || *c > 1.0)
        {
            return Err(Error::domain(format!(
                "simplex components must lie in [0, 1]: {components:?}"
            )));
        }
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::domain(format!(
                "simplex components sum to {sum}, not 1"
            )));
        }
        Ok(Self(components))
    }

    /// Normalizes non-negative weights onto the simplex.
    pub fn normalize(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::numeric(format!(
                "cannot normalize weights {weights:?}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 || !total.is_finite() {
            return Err(Error::numeric(format!("weights sum to {total}")));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    /// Mean of several simplex vectors of equal length.
    pub fn mean(members: &[SimplexVector]) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::contract("cannot average zero distributions"))?;
        let k = first.len();
        let mut acc = vec![0.0; k];
        for m in members {
            if m.len() != k {
                return Err(Error::contract("distributions differ in class count"));
            }
            for (a, v) in acc.iter_mut().zip(m.as_slice()) {
                *a += v;
            }
        }
        Self::normalize(&acc)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Argmax with ties resolved toward the lowest index, and its probability.
    pub fn argmax(&self) -> (usize, f64) {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate().skip(1) {
            if v > self.0[best] {
                best = i;
            }
        }
        (best, self.0[best])
    }
}

impl TryFrom<Vec<f64>> for SimplexVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SimplexVector> for Vec<f64> {
    fn from(s: SimplexVector) -> Self {
        s.0
    }
}
