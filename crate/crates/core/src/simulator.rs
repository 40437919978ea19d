//! Dense statevector simulation over the gate set {H, Ry, Rz, CNOT}.
//!
//! Qubit 0 is the least-significant bit of the basis-state index.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// The all-zero basis state |0…0⟩.
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_capacity(n_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    /// Wraps raw amplitudes. The length must be a power of two; the caller is
    /// responsible for normalization.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Shape(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_capacity(n_qubits)?;
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies one gate in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            Gate::H { target } => {
                self.apply_single(target, |a, b| {
                    ((a + b) * FRAC_1_SQRT_2, (a - b) * FRAC_1_SQRT_2)
                });
            }
            Gate::Ry { target, angle } => {
                let (s, c) = (angle / 2.0).sin_cos();
                self.apply_single(target, |a, b| (a * c - b * s, a * s + b * c));
            }
            Gate::Rz { target, angle } => {
                let lo = Complex64::from_polar(1.0, -angle / 2.0);
                let hi = Complex64::from_polar(1.0, angle / 2.0);
                self.apply_single(target, |a, b| (a * lo, b * hi));
            }
            Gate::Cnot { control, target } => self.apply_cnot(control, target),
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.apply(g))
    }

    /// ⟨self|other⟩ = Σ conj(self_k)·other_k.
    pub fn inner_product(&self, other: &Statevector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Shape(format!(
                "inner product of {}-qubit and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// ⟨Z⟩ on one qubit: +1 weight for bit 0, −1 for bit 1.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = 1usize << qubit;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| if k & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }

    /// Probability of reading 0 on `qubit`.
    pub fn marginal_zero(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = 1usize << qubit;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(k, _)| k & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::Index(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    // Pairs (j, j + 2^q) for every j with bit q clear.
    #[inline]
    fn apply_single<F>(&mut self, target: usize, op: F)
    where
        F: Fn(Complex64, Complex64) -> (Complex64, Complex64),
    {
        let stride = 1usize << target;
        for block in self.amplitudes.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (na, nb) = op(*a, *b);
                *a = na;
                *b = nb;
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for k in 0..self.amplitudes.len() {
            if k & cmask != 0 && k & tmask == 0 {
                self.amplitudes.swap(k, k | tmask);
            }
        }
    }
}

fn check_capacity(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "{n_qubits} qubits requested, supported range is 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "GateRecord", try_from = "GateRecord")]
pub enum Gate {
    H { target: usize },
    Ry { target: usize, angle: f64 },
    Rz { target: usize, angle: f64 },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn target(&self) -> usize {
        match *self {
            Gate::H { target }
            | Gate::Ry { target, .. }
            | Gate::Rz { target, .. }
            | Gate::Cnot { target, .. } => target,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            Gate::Cnot { control, .. } => Some(control),
            _ => None,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Ry { angle, .. } | Gate::Rz { angle, .. } => Some(angle),
            _ => None,
        }
    }

    /// The gate that undoes this one.
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Ry { target, angle } => Gate::Ry { target, angle: -angle },
            Gate::Rz { target, angle } => Gate::Rz { target, angle: -angle },
            g => g,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let target = self.target();
        if target >= n_qubits {
            return Err(Error::Index(format!(
                "gate target {target} out of range for {n_qubits} qubits"
            )));
        }
        if let Some(control) = self.control() {
            if control >= n_qubits {
                return Err(Error::Index(format!(
                    "gate control {control} out of range for {n_qubits} qubits"
                )));
            }
            if control == target {
                return Err(Error::Index(format!("CNOT control equals target ({target})")));
            }
        }
        if let Some(angle) = self.angle() {
            if !angle.is_finite() {
                return Err(Error::Validation(format!("non-finite rotation angle {angle}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
enum GateKind {
    H,
    Ry,
    Rz,
    #[serde(rename = "CNOT")]
    Cnot,
}

/// Flat JSON shape of a gate: `{kind, target, control?, angle?}`.
#[derive(Serialize, Deserialize)]
struct GateRecord {
    kind: GateKind,
    target: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    control: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
}

impl From<Gate> for GateRecord {
    fn from(g: Gate) -> Self {
        let kind = match g {
            Gate::H { .. } => GateKind::H,
            Gate::Ry { .. } => GateKind::Ry,
            Gate::Rz { .. } => GateKind::Rz,
            Gate::Cnot { .. } => GateKind::Cnot,
        };
        GateRecord { kind, target: g.target(), control: g.control(), angle: g.angle() }
    }
}

impl TryFrom<GateRecord> for Gate {
    type Error = String;

    fn try_from(r: GateRecord) -> std::result::Result<Self, String> {
        let angle = || r.angle.ok_or_else(|| format!("{:?} gate requires an angle", r.kind));
        Ok(match r.kind {
            GateKind::H => Gate::H { target: r.target },
            GateKind::Ry => Gate::Ry { target: r.target, angle: angle()? },
            GateKind::Rz => Gate::Rz { target: r.target, angle: angle()? },
            GateKind::Cnot => Gate::Cnot {
                control: r.control.ok_or("CNOT gate requires a control")?,
                target: r.target,
            },
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_capacity(n_qubits)?;
        Ok(Self { n_qubits, gates: Vec::new() })
    }

    pub fn with_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n_qubits)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Applies every gate in order to `state`.
    pub fn run(&self, mut state: Statevector) -> Result<Statevector> {
        self.run_in_place(&mut state)?;
        Ok(state)
    }

    pub fn run_in_place(&self, state: &mut Statevector) -> Result<()> {
        if self.n_qubits != state.n_qubits {
            return Err(Error::Shape(format!(
                "{}-qubit circuit applied to a {}-qubit state",
                self.n_qubits, state.n_qubits
            )));
        }
        state.apply_all(&self.gates)
    }

    /// Runs the circuit on |0…0⟩.
    pub fn prepare(&self) -> Result<Statevector> {
        self.run(Statevector::new(self.n_qubits)?)
    }

    /// JSON gate-list dump for debugging.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn new_statevector(n_qubits: usize) -> Result<Statevector> {
    Statevector::new(n_qubits)
}

pub fn apply_gate(mut state: Statevector, gate: &Gate) -> Result<Statevector> {
    state.apply(gate)?;
    Ok(state)
}

pub fn run_circuit(circuit: &Circuit, state: Statevector) -> Result<Statevector> {
    circuit.run(state)
}
