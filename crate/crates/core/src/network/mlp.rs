//! Fully connected network with manual reverse-mode differentiation.
//!
//! All parameters live in one flat vector. Layer `l` occupies a row-major
//! `output_dim × input_dim` weight block followed by its `output_dim` biases,
//! which keeps the optimizer, finite-difference checks and checkpointing
//! layout-agnostic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::SeededStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Exponential,
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub activation: Activation,
    /// Inverted dropout applied to this layer's activations (hidden layers only).
    pub dropout_rate: f64,
}

impl LayerSpec {
    pub fn new(input_dim: usize, output_dim: usize, activation: Activation) -> Self {
        Self {
            input_dim,
            output_dim,
            activation,
            dropout_rate: 0.0,
        }
    }

    pub fn with_dropout(mut self, rate: f64) -> Self {
        self.dropout_rate = rate;
        self
    }

    fn num_params(&self) -> usize {
        self.output_dim * self.input_dim + self.output_dim
    }
}

/// Whether stochastic layers are active during a forward pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
    /// Evaluation with dropout left on (Monte Carlo dropout sampling).
    McDropout,
}

/// Activations cached by [`Mlp::forward`] for [`Mlp::backward`].
#[derive(Clone, Debug)]
pub struct Tape {
    version: u64,
    inputs: Vec<Vec<f64>>,
    pre_activations: Vec<Vec<f64>>,
    masks: Vec<Option<Vec<f64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mlp {
    specs: Vec<LayerSpec>,
    params: Vec<f64>,
    #[serde(skip)]
    version: u64,
}

impl PartialEq for Mlp {
    fn eq(&self, other: &Self) -> bool {
        self.specs == other.specs && self.params == other.params
    }
}

impl Mlp {
    /// Zero-initialized network with the given layer stack.
    pub fn new(specs: Vec<LayerSpec>) -> Result<Self> {
        validate_specs(&specs)?;
        let n = specs.iter().map(LayerSpec::num_params).sum();
        Ok(Self {
            specs,
            params: vec![0.0; n],
            version: 0,
        })
    }

    pub fn from_params(specs: Vec<LayerSpec>, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::new(specs)?;
        if params.len() != net.params.len() {
            return Err(Error::contract(format!(
                "expected {} parameters, got {}",
                net.params.len(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::numeric("non-finite parameter"));
        }
        net.params = params;
        Ok(net)
    }

    /// He-normal weights for ReLU layers, Glorot-normal otherwise; zero biases.
    pub fn init(&mut self, rng: &mut SeededStream) {
        let specs = self.specs.clone();
        let mut offset = 0;
        for spec in &specs {
            let fan_in = spec.input_dim as f64;
            let std = match spec.activation {
                Activation::Relu => (2.0 / fan_in).sqrt(),
                _ => (2.0 / (fan_in + spec.output_dim as f64)).sqrt(),
            };
            let nw = spec.input_dim * spec.output_dim;
            for w in &mut self.params[offset..offset + nw] {
                *w = std * rng.standard_normal();
            }
            for b in &mut self.params[offset + nw..offset + spec.num_params()] {
                *b = 0.0;
            }
            offset += spec.num_params();
        }
        self.version += 1;
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn input_dim(&self) -> usize {
        self.specs[0].input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.specs[self.specs.len() - 1].output_dim
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Mutable parameter access; invalidates outstanding tapes.
    pub fn params_mut(&mut self) -> &mut [f64] {
        self.version += 1;
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    /// `(weights, biases)` of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let offset: usize = self.specs[..l].iter().map(LayerSpec::num_params).sum();
        let spec = &self.specs[l];
        let nw = spec.input_dim * spec.output_dim;
        (
            &self.params[offset..offset + nw],
            &self.params[offset + nw..offset + spec.num_params()],
        )
    }

    /// Squared L2 norm of all weight matrices (biases excluded).
    pub fn weight_norm_sq(&self) -> f64 {
        (0..self.specs.len())
            .map(|l| self.layer(l).0.iter().map(|w| w * w).sum::<f64>())
            .sum()
    }

    pub fn forward(
        &self,
        input: &[f64],
        mode: Mode,
        rng: &mut SeededStream,
    ) -> Result<(Vec<f64>, Tape)> {
        if input.len() != self.input_dim() {
            return Err(Error::contract(format!(
                "input has dimension {}, network expects {}",
                input.len(),
                self.input_dim()
            )));
        }
        let last = self.specs.len() - 1;
        let mut tape = Tape {
            version: self.version,
            inputs: Vec::with_capacity(self.specs.len()),
            pre_activations: Vec::with_capacity(self.specs.len()),
            masks: Vec::with_capacity(self.specs.len()),
        };
        let mut x = input.to_vec();
        for (l, spec) in self.specs.iter().enumerate() {
            let (w, b) = self.layer(l);
            let mut z = b.to_vec();
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &w[o * spec.input_dim..(o + 1) * spec.input_dim];
                *zo += row.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
            }
            let mut h: Vec<f64> = match spec.activation {
                Activation::Relu => z.iter().map(|v| v.max(0.0)).collect(),
                Activation::Exponential => z.iter().map(|v| v.exp()).collect(),
                Activation::Identity => z.clone(),
            };
            if h.iter().any(|v| !v.is_finite()) {
                return Err(Error::numeric(format!(
                    "non-finite activation in layer {l}"
                )));
            }
            let dropout_on = l != last && spec.dropout_rate > 0.0 && mode != Mode::Eval;
            let mask = if dropout_on {
                let keep = 1.0 - spec.dropout_rate;
                let mask: Vec<f64> = (0..h.len())
                    .map(|_| {
                        if rng.uniform() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    })
                    .collect();
                for (v, m) in h.iter_mut().zip(&mask) {
                    *v *= m;
                }
                Some(mask)
            } else {
                None
            };
            tape.inputs.push(std::mem::replace(&mut x, h));
            tape.pre_activations.push(z);
            tape.masks.push(mask);
        }
        Ok((x, tape))
    }

    /// Deterministic evaluation-mode forward pass.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        // Eval mode never draws from the stream.
        let mut unused = SeededStream::new(0, 0);
        self.forward(input, Mode::Eval, &mut unused).map(|(y, _)| y)
    }

    /// Gradient of a scalar loss with respect to every parameter, given
    /// `output_grad = dL/d(output)`.
    pub fn backward(&self, tape: &Tape, output_grad: &[f64]) -> Result<Vec<f64>> {
        if tape.version != self.version || tape.inputs.len() != self.specs.len() {
            return Err(Error::contract(
                "tape was recorded against different parameters",
            ));
        }
        if output_grad.len() != self.output_dim() {
            return Err(Error::contract(format!(
                "output gradient has length {}, network outputs {}",
                output_grad.len(),
                self.output_dim()
            )));
        }
        let mut grads = vec![0.0; self.params.len()];
        let mut offset = self.params.len();
        let mut g = output_grad.to_vec();
        for l in (0..self.specs.len()).rev() {
            let spec = &self.specs[l];
            offset -= spec.num_params();
            if let Some(mask) = &tape.masks[l] {
                for (gi, m) in g.iter_mut().zip(mask) {
                    *gi *= m;
                }
            }
            let z = &tape.pre_activations[l];
            match spec.activation {
                Activation::Relu => {
                    for (gi, zi) in g.iter_mut().zip(z) {
                        if *zi <= 0.0 {
                            *gi = 0.0;
                        }
                    }
                }
                Activation::Exponential => {
                    for (gi, zi) in g.iter_mut().zip(z) {
                        *gi *= zi.exp();
                    }
                }
                Activation::Identity => {}
            }
            let x = &tape.inputs[l];
            let nw = spec.input_dim * spec.output_dim;
            let (w, _) = self.layer(l);
            let mut g_in = vec![0.0; spec.input_dim];
            for (o, &go) in g.iter().enumerate() {
                if go == 0.0 {
                    continue;
                }
                let row = o * spec.input_dim;
                for i in 0..spec.input_dim {
                    grads[offset + row + i] += go * x[i];
                    g_in[i] += w[row + i] * go;
                }
                grads[offset + nw + o] += go;
            }
            g = g_in;
        }
        Ok(grads)
    }
}

fn validate_specs(specs: &[LayerSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::contract("network needs at least one layer"));
    }
    for (l, spec) in specs.iter().enumerate() {
        if spec.input_dim == 0 || spec.output_dim == 0 {
            return Err(Error::contract(format!("layer {l} has a zero dimension")));
        }
        if !(0.0..1.0).contains(&spec.dropout_rate) {
            return Err(Error::contract(format!(
                "layer {l} dropout rate {} outside [0, 1)",
                spec.dropout_rate
            )));
        }
        if l + 1 < specs.len() {
            if spec.activation == Activation::Exponential {
                return Err(Error::contract(
                    "exponential activation is only valid on the final layer",
                ));
            }
            if specs[l + 1].input_dim != spec.output_dim {
                return Err(Error::contract(format!(
                    "layer {} expects input {}, previous layer outputs {}",
                    l + 1,
                    specs[l + 1].input_dim,
                    spec.output_dim
                )));
            }
        }
    }
    Ok(())
}

/// Hidden ReLU stack followed by an output layer with the given activation.
pub fn build_specs(
    input_dim: usize,
    hidden: &[usize],
    output_dim: usize,
    output: Activation,
    dropout_rate: f64,
) -> Vec<LayerSpec> {
    let mut specs = Vec::with_capacity(hidden.len() + 1);
    let mut prev = input_dim;
    for &h in hidden {
        specs.push(LayerSpec::new(prev, h, Activation::Relu).with_dropout(dropout_rate));
        prev = h;
    }
    specs.push(LayerSpec::new(prev, output_dim, output));
    specs
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| e / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{finite_difference_grad, max_relative_error};

    fn small_net(seed: u64) -> Mlp {
        let mut net = Mlp::new(build_specs(4, &[10], 3, Activation::Identity, 0.0)).unwrap();
        net.init(&mut SeededStream::new(seed, 0));
        net
    }

    #[test]
    fn zero_net_with_exponential_head_outputs_ones() {
        let net = Mlp::new(build_specs(5, &[7, 7], 2, Activation::Exponential, 0.0)).unwrap();
        let out = net.predict(&[0.3, -1.0, 2.0, 0.0, 5.0]).unwrap();
        assert_eq!(out, vec![1.0, 1.0]);
    }

    #[test]
    fn zero_dropout_train_equals_eval() {
        let net = small_net(1);
        let x = [0.1, 0.2, -0.3, 0.4];
        let mut rng = SeededStream::new(0, 1);
        let (train, _) = net.forward(&x, Mode::Train, &mut rng).unwrap();
        assert_eq!(train, net.predict(&x).unwrap());
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let mut params = vec![0.0; 9 + 3];
        for i in 0..3 {
            params[i * 3 + i] = 1.0;
        }
        let net =
            Mlp::from_params(vec![LayerSpec::new(3, 3, Activation::Identity)], params).unwrap();
        assert_eq!(
            net.predict(&[1.5, -2.0, 0.25]).unwrap(),
            vec![1.5, -2.0, 0.25]
        );
    }

    #[test]
    fn backward_matches_finite_differences() {
        let net = small_net(7);
        let x = [0.5, -0.2, 0.9, 1.3];
        let weights = [0.3, -1.1, 0.7];
        let loss = |p: &[f64]| {
            let n = Mlp::from_params(net.specs().to_vec(), p.to_vec()).unwrap();
            let y = n.predict(&x).unwrap();
            y.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>()
        };
        let (_, tape) = net
            .forward(&x, Mode::Eval, &mut SeededStream::new(0, 0))
            .unwrap();
        let analytic = net.backward(&tape, &weights).unwrap();
        let fd = finite_difference_grad(loss, net.params(), 1e-6).unwrap();
        assert!(max_relative_error(&analytic, &fd, 1e-7) < 1e-4);
    }

    #[test]
    fn backward_is_linear_in_output_grad() {
        let net = small_net(3);
        let x = [1.0, 2.0, 3.0, 4.0];
        let (_, tape) = net
            .forward(&x, Mode::Eval, &mut SeededStream::new(0, 0))
            .unwrap();
        let zero = net.backward(&tape, &[0.0; 3]).unwrap();
        assert!(zero.iter().all(|g| *g == 0.0));
        let g1 = net.backward(&tape, &[0.2, -0.4, 1.0]).unwrap();
        let g3 = net.backward(&tape, &[0.6, -1.2, 3.0]).unwrap();
        for (a, b) in g1.iter().zip(&g3) {
            assert!((3.0 * a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn stale_tape_is_rejected() {
        let mut net = small_net(3);
        let (_, tape) = net
            .forward(&[0.0; 4], Mode::Eval, &mut SeededStream::new(0, 0))
            .unwrap();
        net.params_mut()[0] += 1.0;
        assert!(matches!(
            net.backward(&tape, &[1.0; 3]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn shape_errors() {
        let net = small_net(3);
        assert!(matches!(net.predict(&[0.0; 5]), Err(Error::Contract(_))));
        let (_, tape) = net
            .forward(&[0.0; 4], Mode::Eval, &mut SeededStream::new(0, 0))
            .unwrap();
        assert!(matches!(
            net.backward(&tape, &[1.0; 2]),
            Err(Error::Contract(_))
        ));
        assert!(Mlp::new(vec![
            LayerSpec::new(2, 3, Activation::Exponential),
            LayerSpec::new(3, 2, Activation::Identity),
        ])
        .is_err());
        assert!(Mlp::new(vec![
            LayerSpec::new(2, 3, Activation::Relu),
            LayerSpec::new(4, 2, Activation::Identity)
        ])
        .is_err());
    }

    #[test]
    fn exponential_overflow_is_a_numeric_error() {
        let mut params = vec![0.0; 2 + 2];
        params[0] = 1000.0;
        let net =
            Mlp::from_params(vec![LayerSpec::new(1, 2, Activation::Exponential)], params).unwrap();
        assert!(matches!(net.predict(&[1.0]), Err(Error::Numeric(_))));
    }

    #[test]
    fn dropout_masks_use_inverted_scaling() {
        let mut net = Mlp::new(build_specs(3, &[2000], 1, Activation::Identity, 0.3)).unwrap();
        net.init(&mut SeededStream::new(1, 1));
        let x = [1.0, 1.0, 1.0];
        let mut rng = SeededStream::new(1, 2);
        let (_, tape) = net.forward(&x, Mode::Train, &mut rng).unwrap();
        let mask = tape.masks[0].as_ref().unwrap();
        let kept = mask.iter().filter(|m| **m > 0.0).count() as f64 / mask.len() as f64;
        assert!((kept - 0.7).abs() < 0.04);
        assert!(mask
            .iter()
            .all(|m| *m == 0.0 || (*m - 1.0 / 0.7).abs() < 1e-15));
        assert!(tape.masks[1].is_none());
    }

    #[test]
    fn softmax_is_stable() {
        let p = softmax(&[1000.0, 1000.0]);
        assert_eq!(p, vec![0.5, 0.5]);
    }
}
