//! 4 → 12 → 6 → 1 feed-forward baseline with ReLU hidden layers, inverted
//! dropout after each hidden layer and a sigmoid output, trained with Adam.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LAYER_SIZES: [usize; 4] = [4, 12, 6, 1];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs × inputs`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], biases: vec![0.0; outputs] }
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.biases)
            .map(|(w, b)| w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect()
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<Dense>,
    pub dropout_rate: f64,
}

/// Per-hidden-layer keep masks; `false` drops the unit.
pub type DropoutMasks = Vec<Vec<bool>>;

struct Trace {
    /// Inputs to each layer (post-activation, post-dropout of the previous one).
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of each layer.
    pre: Vec<Vec<f64>>,
    output_logit: f64,
}

impl MlpModel {
    /// He-uniform weights (`U(±√(6/fan_in))`), zero biases.
    pub fn build(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = LAYER_SIZES
            .windows(2)
            .map(|w| {
                let mut layer = Dense::zeros(w[0], w[1]);
                let limit = (6.0 / w[0] as f64).sqrt();
                layer.weights.iter_mut().for_each(|v| *v = rng.random_range(-limit..limit));
                layer
            })
            .collect();
        Self { layers, dropout_rate: 0.3 }
    }

    pub fn zeros() -> Self {
        let layers = LAYER_SIZES.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect();
        Self { layers, dropout_rate: 0.3 }
    }

    pub fn with_dropout(mut self, rate: f64) -> Self {
        self.dropout_rate = rate;
        self
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.layers[0].inputs {
            return Err(Error::Shape(format!(
                "network takes {} inputs, got {}",
                self.layers[0].inputs,
                x.len()
            )));
        }
        Ok(())
    }

    /// Draws keep masks for every hidden layer.
    pub fn sample_masks(&self, rng: &mut impl Rng) -> DropoutMasks {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| (0..l.outputs).map(|_| rng.random::<f64>() >= self.dropout_rate).collect())
            .collect()
    }

    fn trace(&self, x: &[f64], masks: Option<&DropoutMasks>) -> Trace {
        let keep_scale = 1.0 / (1.0 - self.dropout_rate);
        let last = self.layers.len() - 1;
        let mut inputs = vec![x.to_vec()];
        let mut pre = Vec::with_capacity(self.layers.len());
        for (li, layer) in self.layers.iter().enumerate() {
            let z = layer.affine(inputs.last().expect("at least the input"));
            if li < last {
                let mut a: Vec<f64> = z.iter().map(|v| v.max(0.0)).collect();
                if let Some(m) = masks {
                    a.iter_mut()
                        .zip(&m[li])
                        .for_each(|(v, &keep)| *v = if keep { *v * keep_scale } else { 0.0 });
                }
                inputs.push(a);
            }
            pre.push(z);
        }
        let output_logit = pre[last][0];
        Trace { inputs, pre, output_logit }
    }

    /// Inference-mode probability: no dropout, no rescaling.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(sigmoid(self.trace(x, None).output_logit))
    }

    /// Training-mode forward pass with explicit masks.
    pub fn forward_with_masks(&self, x: &[f64], masks: &DropoutMasks) -> Result<f64> {
        self.check_input(x)?;
        let expected: Vec<usize> = self.layers[..self.layers.len() - 1].iter().map(|l| l.outputs).collect();
        if masks.iter().map(Vec::len).collect::<Vec<_>>() != expected {
            return Err(Error::Shape(format!("dropout masks must have sizes {expected:?}")));
        }
        Ok(sigmoid(self.trace(x, Some(masks)).output_logit))
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(u8::from(self.predict_proba(x)? > 0.5))
    }

    /// Flattened parameters: per layer, weights then biases.
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases).copied()).collect()
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Shape(format!("{} parameters for a {}-parameter network", params.len(), self.param_count())));
        }
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.biases.iter_mut()).for_each(|v| *v = it.next().unwrap_or_default());
        }
        Ok(())
    }

    /// Mean BCE over the batch plus `l2 · Σ w²` (weights only), and the
    /// gradient in flat-parameter order.
    pub fn loss_and_gradient(
        &self,
        xs: &[Vec<f64>],
        labels: &[u8],
        l2: f64,
        masks: Option<&[DropoutMasks]>,
    ) -> Result<(f64, Vec<f64>)> {
        if xs.len() != labels.len() || xs.is_empty() {
            return Err(Error::Shape(format!("{} samples with {} labels", xs.len(), labels.len())));
        }
        let mut grads: Vec<Dense> = self.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect();
        let keep_scale = 1.0 / (1.0 - self.dropout_rate);
        let mut loss = 0.0;
        for (s, (x, &y)) in xs.iter().zip(labels).enumerate() {
            self.check_input(x)?;
            let mask = masks.map(|m| &m[s]);
            let tr = self.trace(x, mask);
            loss += bce_logit(tr.output_logit, y);
            // dL/dz for the output layer
            let mut delta = vec![sigmoid(tr.output_logit) - f64::from(y)];
            for li in (0..self.layers.len()).rev() {
                let layer = &self.layers[li];
                let input = &tr.inputs[li];
                let g = &mut grads[li];
                for (o, d) in delta.iter().enumerate() {
                    g.biases[o] += d;
                    let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    row.iter_mut().zip(input).for_each(|(gw, a)| *gw += d * a);
                }
                if li == 0 {
                    break;
                }
                let prev_pre = &tr.pre[li - 1];
                delta = (0..layer.inputs)
                    .map(|i| {
                        let upstream: f64 = delta
                            .iter()
                            .enumerate()
                            .map(|(o, d)| d * layer.weights[o * layer.inputs + i])
                            .sum();
                        let relu = if prev_pre[i] > 0.0 { 1.0 } else { 0.0 };
                        let drop = match mask {
                            Some(m) if m[li - 1][i] => keep_scale,
                            Some(_) => 0.0,
                            None => 1.0,
                        };
                        upstream * relu * drop
                    })
                    .collect();
            }
        }
        let m = xs.len() as f64;
        loss /= m;
        let mut flat = Vec::with_capacity(self.param_count());
        for (layer, g) in self.layers.iter().zip(&grads) {
            flat.extend(g.weights.iter().zip(&layer.weights).map(|(gw, w)| gw / m + 2.0 * l2 * w));
            flat.extend(g.biases.iter().map(|gb| gb / m));
        }
        if l2 != 0.0 {
            loss += l2 * self.layers.iter().flat_map(|l| &l.weights).map(|w| w * w).sum::<f64>();
        }
        Ok((loss, flat))
    }

    /// Mean BCE without regularization, in inference mode.
    pub fn data_loss(&self, xs: &[Vec<f64>], labels: &[u8]) -> Result<f64> {
        let mut total = 0.0;
        for (x, &y) in xs.iter().zip(labels) {
            self.check_input(x)?;
            total += bce_logit(self.trace(x, None).output_logit, y);
        }
        Ok(total / xs.len().max(1) as f64)
    }
}

pub fn build_mlp(seed: u64) -> MlpModel {
    MlpModel::build(seed)
}

/// Inference (`training == false`) or training-mode forward with masks
/// drawn from `dropout_seed`.
pub fn mlp_forward(model: &MlpModel, x: &[f64], training: bool, dropout_seed: u64) -> Result<f64> {
    if training {
        let masks = model.sample_masks(&mut ChaCha8Rng::seed_from_u64(dropout_seed));
        model.forward_with_masks(x, &masks)
    } else {
        model.predict_proba(x)
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// BCE of `σ(z)` against `y`, in the overflow-safe logit form.
fn bce_logit(z: f64, y: u8) -> f64 {
    z.max(0.0) - z * f64::from(y) + (-z.abs()).exp().ln_1p()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub l2_lambda: f64,
    pub early_stop_patience: usize,
    pub lr_reduce_factor: f64,
    pub lr_patience: usize,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub dropout_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            l2_lambda: 1e-4,
            early_stop_patience: 20,
            lr_reduce_factor: 0.5,
            lr_patience: 10,
            max_epochs: 500,
            batch_size: 32,
            dropout_rate: 0.3,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2), ("lr_reduce_factor", self.lr_reduce_factor)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Validation(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Validation(format!("dropout_rate must lie in [0, 1), got {}", self.dropout_rate)));
        }
        if self.l2_lambda < 0.0 {
            return Err(Error::Validation("l2_lambda must be non-negative".into()));
        }
        if self.max_epochs == 0 || self.batch_size == 0 || self.early_stop_patience == 0 || self.lr_patience == 0 {
            return Err(Error::Validation("epoch, batch and patience settings must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub learning_rate: Vec<f64>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64, cfg: &TrainConfig) {
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t);
        let bc2 = 1.0 - cfg.beta2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            *p -= lr * (*m / bc1) / ((*v / bc2).sqrt() + cfg.epsilon);
        }
    }
}

fn check_binary_set(labels: &[u8], what: &str) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::Shape(format!("empty {what} set")));
    }
    if let Some(i) = labels.iter().position(|&l| l > 1) {
        return Err(Error::Validation(format!("{what} label {} at {i} is not binary", labels[i])));
    }
    Ok(())
}

/// Adam on BCE + L2 with mini-batches, early stopping on validation loss
/// (best weights restored) and plateau learning-rate reduction.
pub fn train_mlp(
    model: MlpModel,
    train: (&[Vec<f64>], &[u8]),
    validation: (&[Vec<f64>], &[u8]),
    config: &TrainConfig,
) -> Result<(MlpModel, TrainHistory)> {
    config.validate()?;
    let (xs, ys) = train;
    let (vx, vy) = validation;
    if xs.len() != ys.len() || vx.len() != vy.len() {
        return Err(Error::Shape("feature and label counts differ".into()));
    }
    check_binary_set(ys, "training")?;
    check_binary_set(vy, "validation")?;
    if !ys.contains(&0) || !ys.contains(&1) {
        return Err(Error::Degenerate("MLP training set contains a single class".into()));
    }

    let mut model = model.with_dropout(config.dropout_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = model.flat_params();
    let mut adam = Adam::new(params.len());
    let mut lr = config.learning_rate;
    let mut history = TrainHistory::default();
    let mut best = (f64::INFINITY, model.clone());
    let (mut since_best, mut since_lr_change) = (0usize, 0usize);
    let mut order: Vec<usize> = (0..xs.len()).collect();

    for epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let bx: Vec<Vec<f64>> = batch.iter().map(|&i| xs[i].clone()).collect();
            let by: Vec<u8> = batch.iter().map(|&i| ys[i]).collect();
            let masks: Option<Vec<DropoutMasks>> = (model.dropout_rate > 0.0)
                .then(|| batch.iter().map(|_| model.sample_masks(&mut rng)).collect());
            let (_, grad) = model.loss_and_gradient(&bx, &by, config.l2_lambda, masks.as_deref())?;
            adam.step(&mut params, &grad, lr, config);
            model.set_flat_params(&params)?;
        }
        let train_loss = model.data_loss(xs, ys)?;
        let val_loss = model.data_loss(vx, vy)?;
        history.train_loss.push(train_loss);
        history.val_loss.push(val_loss);
        history.learning_rate.push(lr);

        if val_loss < best.0 {
            best = (val_loss, model.clone());
            history.best_epoch = epoch;
            since_best = 0;
            since_lr_change = 0;
        } else {
            since_best += 1;
            since_lr_change += 1;
            if since_best >= config.early_stop_patience {
                history.stopped_early = true;
                break;
            }
            if since_lr_change >= config.lr_patience {
                lr *= config.lr_reduce_factor;
                since_lr_change = 0;
            }
        }
    }
    Ok((best.1, history))
}
