//! Mini-batch training loops for every method.

use serde::{Deserialize, Serialize};

use super::config::{MethodConfig, MethodKind, Selection, TrainConfig};
use super::model::{ModelBody, TrainedModel};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::evidential::{total_loss_with_grad, DirichletParams, KlVariant, OneHotTarget};
use crate::metrics::accuracy_f1_labels;
use crate::network::{
    adamw_step, build_specs, noam_lr, softmax, Activation, BayesMlp, Mlp, Mode, OptimizerState,
};
use crate::numeric::SeededStream;
use crate::par;

pub(crate) const TRAIN_STREAM: u64 = 0x7241_494E;
const TAG_INIT: u64 = 1;
const TAG_SHUFFLE: u64 = 2;
const TAG_NOISE: u64 = 3;

/// Member `i` of an ensemble trains with this seed.
pub fn member_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
    pub val_f1: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochStats>,
    pub selected_epoch: usize,
    /// Full training-set objective per example before the first step.
    pub initial_objective: f64,
    /// The same quantity after the last step.
    pub final_objective: f64,
}

/// Per-example objective on the network output.
#[derive(Clone, Copy, Debug)]
pub enum Objective {
    /// Output is `α`; Bayes risk plus `λ`-weighted KL.
    Evidential { lambda: f64, variant: KlVariant },
    /// Output is logits; softmax cross-entropy.
    CrossEntropy,
}

impl Objective {
    pub fn for_method(cfg: &MethodConfig) -> Self {
        match cfg.method {
            MethodKind::Evidential => Objective::Evidential {
                lambda: cfg.lambda,
                variant: cfg.kl_variant,
            },
            _ => Objective::CrossEntropy,
        }
    }

    pub fn output_activation(self) -> Activation {
        match self {
            Objective::Evidential { .. } => Activation::Exponential,
            Objective::CrossEntropy => Activation::Identity,
        }
    }

    /// Loss and its gradient with respect to the network output.
    pub fn loss_grad(self, output: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
        let target = OneHotTarget::new(label, output.len())?;
        match self {
            Objective::Evidential { lambda, variant } => {
                let alpha = DirichletParams::new(output.to_vec())?;
                let (loss, grad) = total_loss_with_grad(&alpha, &target, lambda, variant)?;
                Ok((loss.total, grad))
            }
            Objective::CrossEntropy => {
                let max = output.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lse = max + output.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
                let mut grad = softmax(output);
                grad[label] -= 1.0;
                Ok((lse - output[label], grad))
            }
        }
    }
}

/// Dialogue-level inputs: mean-pooled sentence vectors with labels.
pub(crate) fn pooled(ds: &Dataset) -> (Vec<Vec<f64>>, Vec<usize>) {
    ds.examples.iter().map(|e| (e.mean_pool(), e.label)).unzip()
}

fn check_datasets(train: &Dataset, val: &Dataset) -> Result<()> {
    if train.is_empty() {
        return Err(Error::contract("training set is empty"));
    }
    if val.is_empty() {
        return Err(Error::contract("validation set is empty"));
    }
    if train.dim != val.dim || train.num_classes != val.num_classes {
        return Err(Error::contract(
            "training and validation sets disagree on shape",
        ));
    }
    Ok(())
}

fn diverged(e: Error) -> Error {
    match e {
        Error::Numeric(m) | Error::Domain(m) => Error::Training(format!("loss diverged: {m}")),
        other => other,
    }
}

/// Summed gradient of a mini-batch, accumulated in index order.
fn batch_grad(
    net: &Mlp,
    objective: Objective,
    mode: Mode,
    xs: &[Vec<f64>],
    ys: &[usize],
    batch: &[usize],
    noise: &SeededStream,
) -> Result<(f64, Vec<f64>)> {
    let parts = par::map(batch, |&i| -> Result<(f64, Vec<f64>)> {
        let mut rng = noise.derive(i as u64);
        let (out, tape) = net.forward(&xs[i], mode, &mut rng)?;
        let (loss, g) = objective.loss_grad(&out, ys[i])?;
        Ok((loss, net.backward(&tape, &g)?))
    });
    let mut loss = 0.0;
    let mut grad = vec![0.0; net.num_params()];
    for part in parts {
        let (l, g) = part.map_err(diverged)?;
        loss += l;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
    }
    Ok((loss, grad))
}

fn evaluate(
    net: &Mlp,
    objective: Objective,
    xs: &[Vec<f64>],
    ys: &[usize],
) -> Result<(f64, f64, f64)> {
    let outs = par::map(xs, |x| net.predict(x));
    let mut loss = 0.0;
    let mut preds = Vec::with_capacity(xs.len());
    for (out, &y) in outs.into_iter().zip(ys) {
        let out = out.map_err(diverged)?;
        loss += objective.loss_grad(&out, y).map_err(diverged)?.0;
        let (k, _) = out
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
                if v > best.1 {
                    (i, v)
                } else {
                    best
                }
            });
        preds.push(k);
    }
    let (acc, f1) = accuracy_f1_labels(&preds, ys)?;
    Ok((loss / xs.len() as f64, acc, f1))
}

struct Selector<T> {
    selection: Selection,
    best: Option<(f64, f64, usize, T)>,
}

impl<T> Selector<T> {
    fn new(selection: Selection) -> Self {
        Self {
            selection,
            best: None,
        }
    }

    fn offer(&mut self, f1: f64, loss: f64, epoch: usize, candidate: impl FnOnce() -> T) {
        let better = match (&self.best, self.selection) {
            (None, _) | (_, Selection::Last) => true,
            (Some((bf, bl, _, _)), Selection::BestValidation) => {
                f1 > *bf || (f1 == *bf && loss < *bl)
            }
        };
        if better {
            self.best = Some((f1, loss, epoch, candidate()));
        }
    }

    fn finish(self) -> (usize, T) {
        let (_, _, epoch, value) = self.best.expect("at least one epoch");
        (epoch, value)
    }
}

/// Trains one deterministic-architecture network (evidential, L2, MCDP, or an
/// ensemble member) from `seed`.
pub fn train_network(
    train: &Dataset,
    val: &Dataset,
    objective: Objective,
    dropout: f64,
    weight_decay: f64,
    tcfg: &TrainConfig,
    seed: u64,
) -> Result<(Mlp, History)> {
    check_datasets(train, val)?;
    tcfg.validate()?;
    let schedule = tcfg.schedule()?;
    let (xs, ys) = pooled(train);
    let (vx, vy) = pooled(val);
    let specs = build_specs(
        train.dim,
        &tcfg.hidden,
        train.num_classes,
        objective.output_activation(),
        dropout,
    );
    let root = SeededStream::new(seed, TRAIN_STREAM);
    let mut net = Mlp::new(specs)?;
    net.init(&mut root.derive(TAG_INIT));
    let mut opt = OptimizerState::new(net.num_params(), tcfg.adam(weight_decay));
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut selector = Selector::new(tcfg.selection);
    let mut history = History {
        initial_objective: evaluate(&net, objective, &xs, &ys)?.0,
        ..History::default()
    };
    let mut step = 0u64;
    for epoch in 1..=tcfg.epochs {
        root.derive(TAG_SHUFFLE)
            .derive(epoch as u64)
            .shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(tcfg.batch_size) {
            step += 1;
            let noise = root.derive(TAG_NOISE).derive(step);
            let (loss, mut grad) =
                batch_grad(&net, objective, Mode::Train, &xs, &ys, batch, &noise)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Training(format!("non-finite loss at step {step}")));
            }
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= scale);
            epoch_loss += loss;
            adamw_step(net.params_mut(), &grad, &mut opt, noam_lr(step, &schedule)?)
                .map_err(diverged)?;
        }
        let (val_loss, val_accuracy, val_f1) = evaluate(&net, objective, &vx, &vy)?;
        history.epochs.push(EpochStats {
            epoch,
            train_loss: epoch_loss / xs.len() as f64,
            val_loss,
            val_accuracy,
            val_f1,
        });
        selector.offer(val_f1, val_loss, epoch, || net.clone());
    }
    history.final_objective = evaluate(&net, objective, &xs, &ys)?.0;
    let (selected, net) = selector.finish();
    history.selected_epoch = selected;
    Ok((net, history))
}

/// Trains a mean-field Gaussian posterior by Bayes by backprop: one weight
/// sample per step, cross-entropy averaged over the batch, and the KL term
/// weighted per mini-batch then divided by the batch size. The recorded
/// objectives use the posterior mean for the data term plus `KL / N`.
pub fn train_bayes(
    train: &Dataset,
    val: &Dataset,
    cfg: &MethodConfig,
    tcfg: &TrainConfig,
) -> Result<(BayesMlp, History)> {
    check_datasets(train, val)?;
    tcfg.validate()?;
    cfg.validate()?;
    let schedule = tcfg.schedule()?;
    let objective = Objective::CrossEntropy;
    let (xs, ys) = pooled(train);
    let (vx, vy) = pooled(val);
    let specs = build_specs(
        train.dim,
        &tcfg.hidden,
        train.num_classes,
        Activation::Identity,
        0.0,
    );
    let root = SeededStream::new(cfg.seed, TRAIN_STREAM);
    let mut mean = Mlp::new(specs)?;
    mean.init(&mut root.derive(TAG_INIT));
    let mut model = BayesMlp::new(mean, cfg.initial_sigma, cfg.prior_scale)?;
    let p = model.rho.len();
    let mut theta: Vec<f64> = model
        .mean
        .params()
        .iter()
        .chain(&model.rho)
        .copied()
        .collect();
    let mut opt = OptimizerState::new(2 * p, tcfg.adam(cfg.effective_weight_decay()));
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let num_batches = xs.len().div_ceil(tcfg.batch_size);
    let mut selector = Selector::new(tcfg.selection);
    let per_example_kl = |m: &BayesMlp| m.kl() / xs.len() as f64;
    let mut history = History {
        initial_objective: evaluate(&model.mean, objective, &xs, &ys)?.0 + per_example_kl(&model),
        ..History::default()
    };
    let mut step = 0u64;
    for epoch in 1..=tcfg.epochs {
        root.derive(TAG_SHUFFLE)
            .derive(epoch as u64)
            .shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for (b, batch) in order.chunks(tcfg.batch_size).enumerate() {
            step += 1;
            let mut rng = root.derive(TAG_NOISE).derive(step);
            let (sampled, eps) = model.sample(&mut rng).map_err(diverged)?;
            let (loss, grad) = batch_grad(&sampled, objective, Mode::Eval, &xs, &ys, batch, &rng)?;
            let kl = model.kl();
            if !kl.is_finite() {
                return Err(Error::Training(format!("non-finite KL at step {step}")));
            }
            let inv_b = 1.0 / batch.len() as f64;
            let w = cfg.kl_weight_mode.weight(b, num_batches) * inv_b;
            let (dmu, drho) = model.chain(&grad, &eps);
            let (kmu, krho) = model.kl_grad();
            let full: Vec<f64> = dmu
                .iter()
                .zip(&kmu)
                .chain(drho.iter().zip(&krho))
                .map(|(g, k)| g * inv_b + w * k)
                .collect();
            let objective_value = loss * inv_b + w * kl;
            if !objective_value.is_finite() || full.iter().any(|g| !g.is_finite()) {
                return Err(Error::Training(format!(
                    "non-finite objective at step {step}"
                )));
            }
            epoch_loss += loss;
            adamw_step(&mut theta, &full, &mut opt, noam_lr(step, &schedule)?).map_err(diverged)?;
            model.mean.params_mut().copy_from_slice(&theta[..p]);
            model.rho.copy_from_slice(&theta[p..]);
        }
        let (val_loss, val_accuracy, val_f1) = evaluate(&model.mean, objective, &vx, &vy)?;
        history.epochs.push(EpochStats {
            epoch,
            train_loss: epoch_loss / xs.len() as f64,
            val_loss,
            val_accuracy,
            val_f1,
        });
        selector.offer(val_f1, val_loss, epoch, || model.clone());
    }
    history.final_objective =
        evaluate(&model.mean, objective, &xs, &ys)?.0 + per_example_kl(&model);
    let (selected, model) = selector.finish();
    history.selected_epoch = selected;
    Ok((model, history))
}

/// Trains `cfg.method` and packages the result.
pub fn train_method(
    train: &Dataset,
    val: &Dataset,
    cfg: &MethodConfig,
    tcfg: &TrainConfig,
) -> Result<TrainedModel> {
    cfg.validate()?;
    let objective = Objective::for_method(cfg);
    let wd = cfg.effective_weight_decay();
    let (body, histories) = match cfg.method {
        MethodKind::Evidential | MethodKind::L2 | MethodKind::Mcdp => {
            let (net, h) = train_network(
                train,
                val,
                objective,
                cfg.effective_dropout(),
                wd,
                tcfg,
                cfg.seed,
            )?;
            (ModelBody::Single(net), vec![h])
        }
        MethodKind::Bbb => {
            let (model, h) = train_bayes(train, val, cfg, tcfg)?;
            (ModelBody::Bayes(model), vec![h])
        }
        MethodKind::Ensemble => {
            let members = par::map_range(cfg.ensemble_size, |i| {
                train_network(
                    train,
                    val,
                    objective,
                    0.0,
                    wd,
                    tcfg,
                    member_seed(cfg.seed, i),
                )
            });
            let (nets, hs): (Vec<Mlp>, Vec<History>) = members
                .into_iter()
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip();
            (ModelBody::Ensemble(nets), hs)
        }
    };
    Ok(TrainedModel {
        method: cfg.clone(),
        train: tcfg.clone(),
        num_classes: train.num_classes,
        input_dim: train.dim,
        body,
        histories,
    })
}

/// `train_method` for the evidential head.
pub fn train_evidential(
    train: &Dataset,
    val: &Dataset,
    cfg: &MethodConfig,
    tcfg: &TrainConfig,
) -> Result<TrainedModel> {
    train_kind(MethodKind::Evidential, train, val, cfg, tcfg)
}

pub fn train_l2(
    train: &Dataset,
    val: &Dataset,
    cfg: &MethodConfig,
    tcfg: &TrainConfig,
) -> Result<TrainedModel> {
    train_kind(MethodKind::L2, train, val, cfg, tcfg)
}

pub fn train_mcdp(
    train: &Dataset,
    val: &Dataset,
    cfg: &MethodConfig,
    tcfg: &TrainConfig,
) -> Result<TrainedModel> {
    train_kind(MethodKind::Mcdp, train, val, cfg, tcfg)
}

pub fn train_bbb(
    train: &Dataset,
    val: &Dataset,
    cfg: &MethodConfig,
    tcfg: &TrainConfig,
) -> Result<TrainedModel> {
    train_kind(MethodKind::Bbb, train, val, cfg, tcfg)
}

pub fn train_ensemble(
    train: &Dataset,
    val: &Dataset,
    cfg: &MethodConfig,
    tcfg: &TrainConfig,
) -> Result<TrainedModel> {
    train_kind(MethodKind::Ensemble, train, val, cfg, tcfg)
}

fn train_kind(
    kind: MethodKind,
    train: &Dataset,
    val: &Dataset,
    cfg: &MethodConfig,
    tcfg: &TrainConfig,
) -> Result<TrainedModel> {
    if cfg.method != kind {
        return Err(Error::contract(format!(
            "config is for {}, not {kind}",
            cfg.method
        )));
    }
    train_method(train, val, cfg, tcfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{finite_difference_grad, max_relative_error};

    #[test]
    fn cross_entropy_gradient_matches_differences() {
        let z = [0.3, -1.2, 2.0];
        let (_, g) = Objective::CrossEntropy.loss_grad(&z, 1).unwrap();
        let fd = finite_difference_grad(
            |v| Objective::CrossEntropy.loss_grad(v, 1).unwrap().0,
            &z,
            1e-6,
        )
        .unwrap();
        assert!(max_relative_error(&g, &fd, 1e-6) < 1e-6);
    }

    #[test]
    fn member_seeds_are_offsets() {
        assert_eq!(member_seed(7, 0), 7);
        assert_eq!(member_seed(7, 2), 7 + 2 * 0x9E37_79B9);
        assert_eq!(member_seed(u64::MAX, 1), 0x9E37_79B8);
    }
}
