//! Gaussian sentence-vector cohorts.
//!
//! Class `k` has mean `σ · separation / √2 · e_k`, so any two class means sit
//! `separation` noise standard deviations apart. Each sentence vector is its
//! class mean plus isotropic noise of scale `σ`.

use serde::{Deserialize, Serialize};

use super::example::{Dataset, DialogueExample};
use crate::error::{Error, Result};
use crate::numeric::SeededStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    /// Number of dialogues per class; its length is the class count.
    pub per_class: Vec<usize>,
    pub dim: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Distance between class means in units of `noise_scale`.
    pub separation: f64,
    pub noise_scale: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            per_class: vec![300, 200],
            dim: 16,
            min_len: 4,
            max_len: 16,
            separation: 0.6,
            noise_scale: 1.0,
            seed: 20240,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.per_class.len() < 2 {
            return Err(Error::config("per_class", "need at least two classes"));
        }
        if self.per_class.contains(&0) {
            return Err(Error::config(
                "per_class",
                "every class needs at least one example",
            ));
        }
        if self.dim < self.per_class.len() {
            return Err(Error::config(
                "dim",
                "must be at least the number of classes",
            ));
        }
        if self.min_len < 1 || self.max_len < self.min_len {
            return Err(Error::config("min_len", "need 1 <= min_len <= max_len"));
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return Err(Error::config("separation", "must be non-negative"));
        }
        if !(self.noise_scale > 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::config("noise_scale", "must be positive"));
        }
        Ok(())
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let k = spec.per_class.len();
    let offset = spec.noise_scale * spec.separation / std::f64::consts::SQRT_2;
    let root = SeededStream::new(spec.seed, 0x5EED);
    let mut examples = Vec::with_capacity(spec.per_class.iter().sum());
    let mut index = 0u64;
    for (label, &count) in spec.per_class.iter().enumerate() {
        for _ in 0..count {
            let mut rng = root.derive(index);
            let t = rng.int_inclusive(spec.min_len, spec.max_len);
            let features = (0..t)
                .map(|_| {
                    (0..spec.dim)
                        .map(|j| {
                            let mean = if j == label { offset } else { 0.0 };
                            mean + spec.noise_scale * rng.standard_normal()
                        })
                        .collect()
                })
                .collect();
            examples.push(DialogueExample {
                id: format!("syn{index:05}"),
                features,
                label,
            });
            index += 1;
        }
    }
    Dataset::new(spec.dim, k, examples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let spec = SyntheticSpec::default();
        assert_eq!(
            generate_synthetic(&spec).unwrap(),
            generate_synthetic(&spec).unwrap()
        );
    }

    #[test]
    fn counts_and_lengths() {
        let spec = SyntheticSpec {
            per_class: vec![5, 7],
            min_len: 2,
            max_len: 3,
            ..Default::default()
        };
        let ds = generate_synthetic(&spec).unwrap();
        assert_eq!(ds.class_counts(), vec![5, 7]);
        assert!(ds
            .examples
            .iter()
            .all(|e| (2..=3).contains(&e.len()) && e.dim() == 16));
    }

    #[test]
    fn separation_moves_class_means() {
        let spec = SyntheticSpec {
            per_class: vec![400, 400],
            separation: 4.0,
            ..Default::default()
        };
        let ds = generate_synthetic(&spec).unwrap();
        let mut m = [0.0, 0.0];
        for ex in &ds.examples {
            m[ex.label] += ex.mean_pool()[0] / 400.0;
        }
        let want = 4.0 / std::f64::consts::SQRT_2;
        assert!((m[0] - want).abs() < 0.1 && m[1].abs() < 0.1, "{m:?}");
    }

    #[test]
    fn invalid_specs() {
        for spec in [
            SyntheticSpec {
                per_class: vec![3],
                ..Default::default()
            },
            SyntheticSpec {
                per_class: vec![3, 0],
                ..Default::default()
            },
            SyntheticSpec {
                min_len: 0,
                ..Default::default()
            },
            SyntheticSpec {
                noise_scale: 0.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                generate_synthetic(&spec),
                Err(Error::Config { .. })
            ));
        }
    }
}
