//! wasm-bindgen surface for the static demo page in `www/`.
//!
//! Three operations: a ZZ-kernel heatmap over synthetic events, the
//! measurement distribution of one encoded event, and a QNN decision surface
//! trained step by step. The plain functions are native-testable; the
//! `#[wasm_bindgen]` items convert errors to `JsError` and take `u32`
//! seeds so JavaScript can pass plain numbers.

use qstress::data::{synth_generate, PipelineKind, Preprocessor, SynthParams};
use qstress::encodings::{Entanglement, FeatureMapSpec};
use qstress::qkernel::{kernel_matrix, Kernel};
use qstress::qnn::{train_qnn, QnnModel, QnnTrainConfig, TtnAnsatzSpec};
use wasm_bindgen::prelude::*;

fn js(e: qstress::Error) -> JsError {
    JsError::new(&e.to_string())
}

pub fn parse_entanglement(name: &str) -> qstress::Result<Entanglement> {
    match name {
        "full" => Ok(Entanglement::Full),
        "linear" => Ok(Entanglement::Linear),
        "pairs" | "disjoint_pairs" => Ok(Entanglement::DisjointPairs),
        other => Err(qstress::Error::Validation(format!("unknown entanglement `{other}`"))),
    }
}

/// Row-major `n × n` ZZ Gram matrix over the first `n` events of the
/// seeded synthetic dataset, after the quantum preprocessing pipeline.
pub fn zz_heatmap(n: usize, seed: u64, alpha: f64, reps: usize, pattern: &str) -> qstress::Result<Vec<f64>> {
    let data = synth_generate(n.max(2), seed, &SynthParams::default())?;
    let raw: Vec<Vec<f64>> = data.features().into_iter().take(n).collect();
    let x = Preprocessor::fit(PipelineKind::Quantum, &raw)?.transform(&raw)?;
    let spec =
        FeatureMapSpec::zz(8).with_alpha(alpha).with_repetitions(reps).with_entanglement(parse_entanglement(pattern)?);
    let k = kernel_matrix(&x, &Kernel::Quantum(spec))?;
    Ok(k.rows().flatten().copied().collect())
}

/// Basis-state probabilities of `x` (already scaled features) under one map.
pub fn encoded_probabilities(x: &[f64], map: &str, alpha: f64) -> qstress::Result<Vec<f64>> {
    let spec = match map {
        "zz" => FeatureMapSpec::zz(8).with_alpha(alpha),
        "angle" => FeatureMapSpec::angle(4),
        "amplitude" => FeatureMapSpec::amplitude(2),
        other => return Err(qstress::Error::Validation(format!("unknown map `{other}`"))),
    };
    Ok(spec.encode(x)?.probabilities())
}

#[wasm_bindgen(js_name = zzHeatmap)]
pub fn zz_heatmap_js(n: usize, seed: u32, alpha: f64, reps: usize, pattern: &str) -> Result<Vec<f64>, JsError> {
    zz_heatmap(n, u64::from(seed), alpha, reps, pattern).map_err(js)
}

#[wasm_bindgen(js_name = encodedProbabilities)]
pub fn encoded_probabilities_js(x: &[f64], map: &str, alpha: f64) -> Result<Vec<f64>, JsError> {
    encoded_probabilities(x, map, alpha).map_err(js)
}

/// Toy set laid out on the two axes the page plots: `x0` across and `x3`
/// up. Class 1 sits at large `x3`; points come from a Halton sequence so
/// the set needs no RNG.
pub fn toy_points(n: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    let halton = |mut i: usize, base: usize| {
        let (mut f, mut r) = (1.0, 0.0);
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    };
    (1..=n)
        .map(|i| {
            let label = (i % 2) as u8;
            let u = halton(i, 2) * 0.2;
            let v = halton(i, 3);
            let x3 = if label == 1 { 2.7 + 0.4 * v } else { 1.2 * v };
            (vec![u, 0.1, 0.1, x3], label)
        })
        .unzip()
}

#[wasm_bindgen]
pub struct QnnDemo {
    model: QnnModel,
    xs: Vec<Vec<f64>>,
    ys: Vec<u8>,
    epochs: usize,
    last_loss: f64,
}

#[wasm_bindgen]
impl QnnDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(n_points: usize, seed: u32) -> Result<QnnDemo, JsError> {
        let (xs, ys) = toy_points(n_points.max(2));
        let model = QnnModel::new(TtnAnsatzSpec::new(8), FeatureMapSpec::zz(8), u64::from(seed)).map_err(js)?;
        Ok(QnnDemo { model, xs, ys, epochs: 0, last_loss: f64::NAN })
    }

    /// Runs `epochs` more gradient steps and returns the latest loss.
    pub fn step(&mut self, epochs: usize, learning_rate: f64) -> Result<f64, JsError> {
        let cfg = QnnTrainConfig { learning_rate, max_epochs: epochs, plateau_epochs: usize::MAX, ..Default::default() };
        self.model = train_qnn(&self.xs, &self.ys, self.model.clone(), &cfg).map_err(js)?;
        self.epochs += self.model.loss_history.len();
        if let Some(&l) = self.model.loss_history.last() {
            self.last_loss = l;
        }
        Ok(self.last_loss)
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn loss(&self) -> f64 {
        self.last_loss
    }

    pub fn accuracy(&self) -> Result<f64, JsError> {
        let mut correct = 0;
        for (x, &y) in self.xs.iter().zip(&self.ys) {
            correct += usize::from(self.model.predict(x).map_err(js)? == y);
        }
        Ok(correct as f64 / self.xs.len() as f64)
    }

    /// `[x0, x3, label]` triples, flattened.
    pub fn points(&self) -> Vec<f64> {
        self.xs.iter().zip(&self.ys).flat_map(|(x, &y)| [x[0], x[3], f64::from(y)]).collect()
    }

    /// P(class 1) on a `res × res` grid, `x0 ∈ [0, 0.2]` across and
    /// `x3 ∈ [0, π]` from bottom to top, row-major from the top row.
    pub fn surface(&self, res: usize) -> Result<Vec<f64>, JsError> {
        surface(&self.model, res).map_err(js)
    }
}

pub fn surface(model: &QnnModel, res: usize) -> qstress::Result<Vec<f64>> {
    let res = res.max(2);
    let mut out = Vec::with_capacity(res * res);
    for row in 0..res {
        let x3 = std::f64::consts::PI * (res - 1 - row) as f64 / (res - 1) as f64;
        for col in 0..res {
            let x0 = 0.2 * col as f64 / (res - 1) as f64;
            out.push(model.forward(&[x0, 0.1, 0.1, x3])?);
        }
    }
    Ok(out)
}

/// Qubit count the demo uses for a map name.
#[wasm_bindgen(js_name = mapQubits)]
pub fn map_qubits(map: &str) -> usize {
    match map {
        "angle" => 4,
        "amplitude" => 2,
        _ => 8,
    }
}
