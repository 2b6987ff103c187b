//! Trained models and their predictive distributions.

use serde::{Deserialize, Serialize};

use super::config::{MethodConfig, MethodKind, TrainConfig};
use super::record::PredictionRecord;
use super::train::History;
use crate::data::DialogueExample;
use crate::error::{Error, Result};
use crate::evidential::{predictive_distribution, DirichletParams};
use crate::network::{softmax, BayesMlp, Mlp, Mode};
use crate::numeric::{hash_str, SeededStream, SimplexVector};
use crate::par;

pub(crate) const PREDICT_STREAM: u64 = 0x5052_4544;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelBody {
    Single(Mlp),
    Bayes(BayesMlp),
    Ensemble(Vec<Mlp>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub method: MethodConfig,
    pub train: TrainConfig,
    pub num_classes: usize,
    pub input_dim: usize,
    pub body: ModelBody,
    pub histories: Vec<History>,
}

/// Averages probability vectors. Each component is summed in sorted order so
/// the result does not depend on the order of `members`.
pub fn average_probabilities(members: &[Vec<f64>]) -> Result<SimplexVector> {
    let k = members
        .first()
        .ok_or_else(|| Error::contract("cannot average zero distributions"))?
        .len();
    let mut column = Vec::with_capacity(members.len());
    let mut acc = Vec::with_capacity(k);
    for c in 0..k {
        column.clear();
        column.extend(members.iter().map(|m| m[c]));
        column.sort_by(f64::total_cmp);
        acc.push(column.iter().sum::<f64>());
    }
    SimplexVector::normalize(&acc)
}

fn has_dropout(net: &Mlp) -> bool {
    net.specs().iter().any(|s| s.dropout_rate > 0.0)
}

impl TrainedModel {
    pub fn kind(&self) -> MethodKind {
        self.method.method
    }

    pub fn seed(&self) -> u64 {
        self.method.seed
    }

    /// Private sampling stream for one example.
    fn example_stream(&self, id: &str) -> SeededStream {
        SeededStream::new(self.method.seed, PREDICT_STREAM).derive(hash_str(id))
    }

    /// Predictive distribution for pooled features `x`; `id` keys the sampling stream.
    pub fn predictive(&self, x: &[f64], id: &str) -> Result<SimplexVector> {
        if x.len() != self.input_dim {
            return Err(Error::contract(format!(
                "features have dimension {}, model expects {}",
                x.len(),
                self.input_dim
            )));
        }
        let samples = self.method.test_samples;
        if samples < 1 {
            return Err(Error::contract("test_samples must be at least 1"));
        }
        match (&self.body, self.kind()) {
            (ModelBody::Single(net), MethodKind::Evidential) => {
                let alpha = DirichletParams::new(net.predict(x)?)?;
                Ok(predictive_distribution(&alpha))
            }
            (ModelBody::Single(net), MethodKind::Mcdp) if has_dropout(net) => {
                let mut rng = self.example_stream(id);
                let probs = (0..samples)
                    .map(|_| Ok(softmax(&net.forward(x, Mode::McDropout, &mut rng)?.0)))
                    .collect::<Result<Vec<_>>>()?;
                average_probabilities(&probs)
            }
            (ModelBody::Single(net), MethodKind::L2 | MethodKind::Mcdp) => {
                SimplexVector::normalize(&softmax(&net.predict(x)?))
            }
            (ModelBody::Bayes(model), MethodKind::Bbb) => {
                let mut rng = self.example_stream(id);
                let probs = (0..samples)
                    .map(|_| Ok(softmax(&model.sample(&mut rng)?.0.predict(x)?)))
                    .collect::<Result<Vec<_>>>()?;
                average_probabilities(&probs)
            }
            (ModelBody::Ensemble(nets), MethodKind::Ensemble) => {
                if nets.is_empty() {
                    return Err(Error::contract("ensemble has no members"));
                }
                let probs = nets
                    .iter()
                    .map(|n| Ok(softmax(&n.predict(x)?)))
                    .collect::<Result<Vec<_>>>()?;
                average_probabilities(&probs)
            }
            (_, kind) => Err(Error::contract(format!(
                "model body does not match method {kind}"
            ))),
        }
    }

    pub fn predict(&self, example: &DialogueExample) -> Result<PredictionRecord> {
        if example.dim() != self.input_dim {
            return Err(Error::contract(format!(
                "example {} has dimension {}, model expects {}",
                example.id,
                example.dim(),
                self.input_dim
            )));
        }
        let pi_hat = self.predictive(&example.mean_pool(), &example.id)?;
        Ok(PredictionRecord::new(
            example.id.clone(),
            self.kind().name(),
            self.seed(),
            pi_hat,
            example.label,
        ))
    }

    /// Predictions for every example, computed in parallel, in input order.
    pub fn predict_all(&self, examples: &[DialogueExample]) -> Result<Vec<PredictionRecord>> {
        par::map(examples, |e| self.predict(e))
            .into_iter()
            .collect()
    }

    /// Same as [`predict_all`](Self::predict_all) on the calling thread.
    pub fn predict_all_seq(&self, examples: &[DialogueExample]) -> Result<Vec<PredictionRecord>> {
        par::map_seq(examples, |e| self.predict(e))
            .into_iter()
            .collect()
    }

    /// A copy whose sampling methods draw `samples` passes.
    pub fn with_test_samples(&self, samples: usize) -> Self {
        let mut m = self.clone();
        m.method.test_samples = samples;
        m
    }
}

/// Prediction for one example under any trained model.
pub fn predict(model: &TrainedModel, example: &DialogueExample) -> Result<PredictionRecord> {
    model.predict(example)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_is_order_invariant() {
        let a = vec![0.1, 0.9];
        let b = vec![0.3333333333333333, 0.6666666666666667];
        let c = vec![0.7000000000000001, 0.29999999999999993];
        let x = average_probabilities(&[a.clone(), b.clone(), c.clone()]).unwrap();
        let y = average_probabilities(&[c, a, b]).unwrap();
        assert_eq!(x, y);
    }
}
