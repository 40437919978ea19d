//! Data-encoding circuits: angle, amplitude and ZZ feature maps.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{Circuit, Gate, Statevector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Angle,
    Amplitude,
    Zz,
}

/// Which qubit pairs receive a CNOT–Rz–CNOT block in the ZZ map.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entanglement {
    /// Every pair `(j, k)` with `j < k`.
    #[default]
    Full,
    /// Nearest neighbours `(q, q+1)`.
    Linear,
    /// `(0,1), (2,3), …`
    DisjointPairs,
}

impl Entanglement {
    pub fn pairs(self, n_qubits: usize) -> Vec<(usize, usize)> {
        match self {
            Entanglement::Full => (0..n_qubits)
                .flat_map(|j| (j + 1..n_qubits).map(move |k| (j, k)))
                .collect(),
            Entanglement::Linear => (1..n_qubits).map(|k| (k - 1, k)).collect(),
            Entanglement::DisjointPairs => (0..n_qubits / 2).map(|p| (2 * p, 2 * p + 1)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureMapSpec {
    pub kind: MapKind,
    pub n_qubits: usize,
    /// Scale applied to the two-qubit Rz angles of the ZZ map only.
    pub alpha: f64,
    pub repetitions: usize,
    pub entanglement: Entanglement,
}

impl Default for FeatureMapSpec {
    fn default() -> Self {
        Self::zz(8)
    }
}

impl FeatureMapSpec {
    pub fn zz(n_qubits: usize) -> Self {
        Self {
            kind: MapKind::Zz,
            n_qubits,
            alpha: 0.7,
            repetitions: 1,
            entanglement: Entanglement::Full,
        }
    }

    pub fn angle(n_qubits: usize) -> Self {
        Self { kind: MapKind::Angle, ..Self::zz(n_qubits) }
    }

    pub fn amplitude(n_qubits: usize) -> Self {
        Self { kind: MapKind::Amplitude, ..Self::zz(n_qubits) }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_entanglement(mut self, entanglement: Entanglement) -> Self {
        self.entanglement = entanglement;
        self
    }

    pub fn with_repetitions(mut self, repetitions: usize) -> Self {
        self.repetitions = repetitions;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > crate::simulator::MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "feature map over {} qubits",
                self.n_qubits
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Validation(format!(
                "entanglement scale alpha={} outside (0, 1]",
                self.alpha
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::Validation("repetitions must be >= 1".into()));
        }
        Ok(())
    }

    /// Checks that `n_features` is compatible with this map.
    pub fn check_features(&self, n_features: usize) -> Result<()> {
        if n_features == 0 {
            return Err(Error::Shape("empty feature vector".into()));
        }
        let ok = match self.kind {
            MapKind::Angle => n_features == self.n_qubits,
            MapKind::Amplitude => n_features == 1 << self.n_qubits,
            MapKind::Zz => self.n_qubits.is_multiple_of(n_features),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{:?} map on {} qubits cannot take {} features",
                self.kind, self.n_qubits, n_features
            )))
        }
    }

    /// Prepares |φ(x)⟩ for this map.
    pub fn encode(&self, x: &[f64]) -> Result<Statevector> {
        self.validate()?;
        self.check_features(x.len())?;
        match self.kind {
            MapKind::Angle => angle_encode(x)?.prepare(),
            MapKind::Amplitude => amplitude_encode(x),
            MapKind::Zz => zz_feature_map(x, self)?.prepare(),
        }
    }
}

fn check_finite(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Shape("empty feature vector".into()));
    }
    if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Validation(format!("feature {i} is not finite ({v})")));
    }
    Ok(())
}

/// One `Ry(x_j)` on qubit `j`.
pub fn angle_encode(x: &[f64]) -> Result<Circuit> {
    check_finite(x)?;
    let mut circuit = Circuit::new(x.len())?;
    for (target, &angle) in x.iter().enumerate() {
        circuit.push(Gate::Ry { target, angle })?;
    }
    Ok(circuit)
}

/// Loads `x / ‖x‖₂` directly as amplitudes on basis states |k⟩.
pub fn amplitude_encode(x: &[f64]) -> Result<Statevector> {
    check_finite(x)?;
    if x.len() < 2 || !x.len().is_power_of_two() {
        return Err(Error::Shape(format!(
            "amplitude encoding needs 2^n features, got {}",
            x.len()
        )));
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Normalization("cannot amplitude-encode the zero vector".into()));
    }
    Statevector::from_amplitudes(x.iter().map(|v| Complex64::new(v / norm, 0.0)).collect())
}

/// ZZ feature map. Feature `j` is replicated onto qubits
/// `j*r .. j*r + r` where `r = n_qubits / x.len()`.
pub fn zz_feature_map(x: &[f64], spec: &FeatureMapSpec) -> Result<Circuit> {
    check_finite(x)?;
    spec.validate()?;
    let n = spec.n_qubits;
    if !n.is_multiple_of(x.len()) {
        return Err(Error::Shape(format!(
            "{n} qubits is not an integer multiple of {} features",
            x.len()
        )));
    }
    let replication = n / x.len();
    let feature = |q: usize| x[q / replication];
    let pairs = spec.entanglement.pairs(n);

    let mut circuit = Circuit::new(n)?;
    for _ in 0..spec.repetitions {
        for q in 0..n {
            circuit.push(Gate::H { target: q })?;
        }
        for q in 0..n {
            circuit.push(Gate::Rz { target: q, angle: feature(q) })?;
        }
        for &(j, k) in &pairs {
            circuit.push(Gate::Cnot { control: j, target: k })?;
            circuit.push(Gate::Rz { target: k, angle: spec.alpha * feature(j) * feature(k) })?;
            circuit.push(Gate::Cnot { control: j, target: k })?;
        }
    }
    Ok(circuit)
}
