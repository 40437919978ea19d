//! Variational classifier: ZZ-encoded input, tree-tensor-network ansatz of
//! Ry rotations and CNOTs, Pauli-Z readout on the tree root.
//!
//! Parameter layout for `n` qubits: `theta[2q]` and `theta[2q + 1]` are the
//! two first-layer rotations on qubit `q`; `theta[2n + q]` is its
//! second-layer rotation.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encodings::{zz_feature_map, FeatureMapSpec, MapKind};
use crate::error::{Error, Result};
use crate::par;
use crate::simulator::{Circuit, Gate, Statevector};

const PROB_CLAMP: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TtnAnsatzSpec {
    pub n_qubits: usize,
    /// Readout qubit; defaults to the tree root (`n_qubits − 1`).
    pub output_qubit: Option<usize>,
}

impl Default for TtnAnsatzSpec {
    fn default() -> Self {
        Self { n_qubits: 8, output_qubit: None }
    }
}

impl TtnAnsatzSpec {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, output_qubit: None }
    }

    pub fn param_count(&self) -> usize {
        3 * self.n_qubits
    }

    pub fn output(&self) -> usize {
        self.output_qubit.unwrap_or(self.n_qubits.saturating_sub(1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 || !self.n_qubits.is_multiple_of(2) {
            return Err(Error::Shape(format!(
                "tree ansatz needs a positive even qubit count, got {}",
                self.n_qubits
            )));
        }
        if self.n_qubits > crate::simulator::MAX_QUBITS {
            return Err(Error::Capacity(format!("{} qubit ansatz", self.n_qubits)));
        }
        if self.output() >= self.n_qubits {
            return Err(Error::Index(format!(
                "output qubit {} out of range for {} qubits",
                self.output(),
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// CNOT tree, child → parent. Each stage pairs neighbouring subtree
    /// roots; the right root of a pair survives. An odd root left over at
    /// the end of a stage is carried up unchanged.
    pub fn tree_pairs(&self) -> Vec<(usize, usize)> {
        let mut roots: Vec<usize> = (0..self.n_qubits).collect();
        let mut pairs = Vec::with_capacity(self.n_qubits.saturating_sub(1));
        while roots.len() > 1 {
            let mut next = Vec::with_capacity(roots.len().div_ceil(2));
            for chunk in roots.chunks(2) {
                match *chunk {
                    [child, parent] => {
                        pairs.push((child, parent));
                        next.push(parent);
                    }
                    [carry] => next.push(carry),
                    _ => unreachable!(),
                }
            }
            roots = next;
        }
        pairs
    }
}

/// How `⟨Z⟩` on the output qubit becomes a class-1 probability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Readout {
    /// `p = (1 − ⟨Z⟩) / 2`
    #[default]
    Affine,
    /// `p = σ(κ·⟨Z⟩)`
    Sigmoid { kappa: f64 },
}

impl Readout {
    pub fn probability(self, z: f64) -> f64 {
        match self {
            Readout::Affine => (1.0 - z) / 2.0,
            Readout::Sigmoid { kappa } => sigmoid(kappa * z),
        }
    }

    /// `dp / d⟨Z⟩`
    fn slope(self, z: f64) -> f64 {
        match self {
            Readout::Affine => -0.5,
            Readout::Sigmoid { kappa } => {
                let s = sigmoid(kappa * z);
                kappa * s * (1.0 - s)
            }
        }
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

pub fn build_ttn_ansatz(spec: &TtnAnsatzSpec, theta: &[f64]) -> Result<Circuit> {
    spec.validate()?;
    let n = spec.n_qubits;
    if theta.len() != spec.param_count() {
        return Err(Error::Shape(format!(
            "ansatz over {n} qubits takes {} parameters, got {}",
            spec.param_count(),
            theta.len()
        )));
    }
    let mut circuit = Circuit::new(n)?;
    for q in 0..n {
        circuit.push(Gate::Ry { target: q, angle: theta[2 * q] })?;
        circuit.push(Gate::Ry { target: q, angle: theta[2 * q + 1] })?;
    }
    for (control, target) in spec.tree_pairs() {
        circuit.push(Gate::Cnot { control, target })?;
    }
    for q in 0..n {
        circuit.push(Gate::Ry { target: q, angle: theta[2 * n + q] })?;
    }
    Ok(circuit)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QnnModel {
    pub spec: TtnAnsatzSpec,
    pub feature_map: FeatureMapSpec,
    pub theta: Vec<f64>,
    pub threshold: f64,
    pub readout: Readout,
    pub loss_history: Vec<f64>,
}

impl QnnModel {
    /// Fresh model with `theta ~ U(−0.1, 0.1)` drawn from `seed`.
    pub fn new(spec: TtnAnsatzSpec, feature_map: FeatureMapSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = (0..spec.param_count()).map(|_| rng.random_range(-0.1..0.1)).collect();
        Self::with_theta(spec, feature_map, theta)
    }

    pub fn with_theta(spec: TtnAnsatzSpec, feature_map: FeatureMapSpec, theta: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        feature_map.validate()?;
        if feature_map.kind != MapKind::Zz {
            return Err(Error::Validation("the QNN encodes inputs with the ZZ feature map".into()));
        }
        if feature_map.n_qubits != spec.n_qubits {
            return Err(Error::Shape(format!(
                "feature map has {} qubits, ansatz has {}",
                feature_map.n_qubits, spec.n_qubits
            )));
        }
        if theta.len() != spec.param_count() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                spec.param_count(),
                theta.len()
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Validation("non-finite ansatz parameter".into()));
        }
        Ok(Self { spec, feature_map, theta, threshold: 0.5, readout: Readout::Affine, loss_history: Vec::new() })
    }

    pub fn param_count(&self) -> usize {
        self.theta.len()
    }

    /// ZZ-encoded input state; independent of `theta`.
    pub fn encode(&self, x: &[f64]) -> Result<Statevector> {
        zz_feature_map(x, &self.feature_map)?.prepare()
    }

    fn expectation_from(&self, encoded: &Statevector, theta: &[f64]) -> Result<f64> {
        let mut state = encoded.clone();
        build_ttn_ansatz(&self.spec, theta)?.run_in_place(&mut state)?;
        state.expectation_z(self.spec.output())
    }

    /// `⟨Z⟩` on the output qubit.
    pub fn expectation(&self, x: &[f64]) -> Result<f64> {
        self.expectation_from(&self.encode(x)?, &self.theta)
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        Ok(self.readout.probability(self.expectation(x)?))
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(self.label_for(self.forward(x)?))
    }

    /// `1` iff `p > threshold`.
    pub fn label_for(&self, p: f64) -> u8 {
        u8::from(p > self.threshold)
    }

    fn shift_gradient_from(&self, encoded: &Statevector) -> Result<Vec<f64>> {
        let mut shifted = self.theta.clone();
        (0..self.theta.len())
            .map(|i| {
                let orig = shifted[i];
                shifted[i] = orig + FRAC_PI_2;
                let plus = self.expectation_from(encoded, &shifted)?;
                shifted[i] = orig - FRAC_PI_2;
                let minus = self.expectation_from(encoded, &shifted)?;
                shifted[i] = orig;
                Ok((plus - minus) / 2.0)
            })
            .collect()
    }
}

pub fn qnn_forward(x: &[f64], model: &QnnModel) -> Result<f64> {
    model.forward(x)
}

pub fn qnn_predict(x: &[f64], model: &QnnModel) -> Result<u8> {
    model.predict(x)
}

/// `∂⟨Z⟩/∂θ_i = (⟨Z⟩(θ_i + π/2) − ⟨Z⟩(θ_i − π/2)) / 2` for every parameter.
pub fn parameter_shift_gradient(x: &[f64], model: &QnnModel) -> Result<Vec<f64>> {
    model.shift_gradient_from(&model.encode(x)?)
}

/// Binary cross-entropy with `p` clamped to `[1e-9, 1 − 1e-9]`.
pub fn bce(p: f64, y: u8) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

fn bce_slope(p: f64, y: u8) -> f64 {
    if !(PROB_CLAMP..=1.0 - PROB_CLAMP).contains(&p) {
        return 0.0;
    }
    if y == 1 {
        -1.0 / p
    } else {
        1.0 / (1.0 - p)
    }
}

fn check_binary(labels: &[u8]) -> Result<()> {
    if let Some(i) = labels.iter().position(|&l| l > 1) {
        return Err(Error::Validation(format!("label {} at {i} is not binary", labels[i])));
    }
    Ok(())
}

/// Mean BCE over the batch and its gradient in `theta`.
pub fn loss_and_gradient(xs: &[Vec<f64>], labels: &[u8], model: &QnnModel) -> Result<(f64, Vec<f64>)> {
    let encoded = par::map(xs, |x| model.encode(x)).into_iter().collect::<Result<Vec<_>>>()?;
    batch_loss_and_gradient(&encoded, labels, model)
}

fn batch_loss_and_gradient(encoded: &[Statevector], labels: &[u8], model: &QnnModel) -> Result<(f64, Vec<f64>)> {
    if encoded.len() != labels.len() || encoded.is_empty() {
        return Err(Error::Shape(format!("{} samples with {} labels", encoded.len(), labels.len())));
    }
    check_binary(labels)?;
    let idx: Vec<usize> = (0..encoded.len()).collect();
    let per_sample = par::map(&idx, |&s| -> Result<(f64, Vec<f64>)> {
        let z = model.expectation_from(&encoded[s], &model.theta)?;
        let p = model.readout.probability(z);
        let scale = bce_slope(p, labels[s]) * model.readout.slope(z);
        let dz = model.shift_gradient_from(&encoded[s])?;
        Ok((bce(p, labels[s]), dz.into_iter().map(|g| g * scale).collect()))
    });
    let m = encoded.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; model.theta.len()];
    for r in per_sample {
        let (l, g) = r?;
        loss += l;
        grad.iter_mut().zip(g).for_each(|(acc, v)| *acc += v);
    }
    grad.iter_mut().for_each(|g| *g /= m);
    Ok((loss / m, grad))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QnnTrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Stop after this many consecutive epochs with `|ΔL| < loss_tolerance`.
    pub plateau_epochs: usize,
    pub loss_tolerance: f64,
}

impl Default for QnnTrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.05, max_epochs: 200, plateau_epochs: 10, loss_tolerance: 1e-6 }
    }
}

/// Full-batch gradient descent on mean BCE, starting from `model.theta`.
/// `loss_history[e]` is the loss before the update of epoch `e`.
pub fn train_qnn(xs: &[Vec<f64>], labels: &[u8], model: QnnModel, config: &QnnTrainConfig) -> Result<QnnModel> {
    if xs.is_empty() {
        return Err(Error::Shape("empty QNN training set".into()));
    }
    check_binary(labels)?;
    if !labels.contains(&0) || !labels.contains(&1) {
        return Err(Error::Degenerate("QNN training set contains a single class".into()));
    }
    if !(config.learning_rate > 0.0) {
        return Err(Error::Validation("learning rate must be positive".into()));
    }
    let mut model = model;
    let encoded = par::map(xs, |x| model.encode(x)).into_iter().collect::<Result<Vec<_>>>()?;
    model.loss_history.clear();
    let mut flat_epochs = 0;
    for _ in 0..config.max_epochs {
        let (loss, grad) = batch_loss_and_gradient(&encoded, labels, &model)?;
        if let Some(&prev) = model.loss_history.last() {
            if (prev - loss).abs() < config.loss_tolerance {
                flat_epochs += 1;
            } else {
                flat_epochs = 0;
            }
        }
        model.loss_history.push(loss);
        if flat_epochs >= config.plateau_epochs {
            break;
        }
        model.theta.iter_mut().zip(&grad).for_each(|(t, g)| *t -= config.learning_rate * g);
    }
    Ok(model)
}
