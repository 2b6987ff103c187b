use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{AugmentConfig, SplitSpec, SyntheticSpec};
use crate::error::{Error, Result};
use crate::methods::{MethodConfig, MethodKind, TrainConfig};
use crate::metrics::DEFAULT_THRESHOLDS;

/// Where dialogues come from: a dataset file to split, or a synthetic cohort.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
    pub synthetic: SyntheticSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub ece_bins: usize,
    pub pwlm_bins: usize,
    pub thresholds: Vec<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            ece_bins: 10,
            pwlm_bins: 10,
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
        }
    }
}

/// Everything a run depends on. Every field has a default, and the resolved
/// form is written next to the outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub out: PathBuf,
    pub methods: Vec<MethodKind>,
    pub seeds: Vec<u64>,
    pub data: DataConfig,
    pub split: SplitSpec,
    pub augment: AugmentConfig,
    pub train: TrainConfig,
    /// Hyperparameter template; `method` and `seed` are set per job.
    pub method: MethodConfig,
    pub eval: EvalConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            out: PathBuf::from("runs/default"),
            methods: MethodKind::ALL.to_vec(),
            seeds: vec![1, 2, 3, 4, 5],
            data: DataConfig::default(),
            split: SplitSpec::default(),
            augment: AugmentConfig {
                per_positive: 2,
                balance: true,
                ..AugmentConfig::default()
            },
            train: TrainConfig::default(),
            method: MethodConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

fn prefixed(prefix: &str, e: Error) -> Error {
    match e {
        Error::Config { field, message } => Error::config(format!("{prefix}.{field}"), message),
        other => other,
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, source: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(1, |s| {
                text[..s.start.min(text.len())].matches('\n').count() + 1
            });
            Error::parse(source, line, e.message().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    /// SHA-256 of the canonical configuration, excluding the output directory.
    pub fn hash(&self) -> Result<String> {
        let canonical = Self {
            out: PathBuf::new(),
            ..self.clone()
        }
        .to_toml()?;
        let digest = Sha256::digest(canonical.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    /// Configuration for one (method, seed) job.
    pub fn job(&self, method: MethodKind, seed: u64) -> MethodConfig {
        MethodConfig {
            method,
            seed,
            ..self.method.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::config("methods", "list at least one method"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "list at least one seed"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::config("methods", format!("`{m}` listed twice")));
            }
        }
        for (i, s) in self.seeds.iter().enumerate() {
            if self.seeds[..i].contains(s) {
                return Err(Error::config("seeds", format!("seed {s} listed twice")));
            }
        }
        match &self.data.path {
            Some(p) if !p.is_file() => {
                return Err(Error::config(
                    "data.path",
                    format!("{} does not exist", p.display()),
                ));
            }
            Some(_) => {}
            None => self
                .data
                .synthetic
                .validate()
                .map_err(|e| prefixed("data.synthetic", e))?,
        }
        self.split.validate().map_err(|e| prefixed("split", e))?;
        if self.augment.min_len < 1 {
            return Err(Error::config("augment.min_len", "must be at least 1"));
        }
        self.train.validate().map_err(|e| prefixed("train", e))?;
        self.method.validate().map_err(|e| prefixed("method", e))?;
        if self.eval.ece_bins == 0 {
            return Err(Error::config("eval.ece_bins", "must be at least 1"));
        }
        if self.eval.pwlm_bins == 0 {
            return Err(Error::config("eval.pwlm_bins", "must be at least 1"));
        }
        if self
            .eval
            .thresholds
            .iter()
            .any(|t| !(0.0..=1.0).contains(t))
        {
            return Err(Error::config(
                "eval.thresholds",
                "thresholds must lie in [0, 1]",
            ));
        }
        Ok(())
    }
}
