//! Independent reference implementations used as test oracles. Nothing here
//! calls into the simulator's gate kernels.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qstress::simulator::Gate;
use qstress::classical_nn::{DropoutMasks, LAYER_SIZES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn hadamard() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}

pub fn ry(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    CMat::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

pub fn rz(theta: f64) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[Complex64::from_polar(1.0, -theta / 2.0), c(0.0, 0.0), c(0.0, 0.0), Complex64::from_polar(1.0, theta / 2.0)],
    )
}

/// `I ⊗ … ⊗ U ⊗ … ⊗ I` with qubit 0 as the rightmost (least significant) factor.
pub fn embed(u: &CMat, target: usize, n: usize) -> CMat {
    let mut m = CMat::identity(1, 1);
    for q in (0..n).rev() {
        let f = if q == target { u.clone() } else { CMat::identity(2, 2) };
        m = m.kronecker(&f);
    }
    m
}

/// CNOT as a permutation of computational basis states.
pub fn cnot(control: usize, target: usize, n: usize) -> CMat {
    let dim = 1 << n;
    let mut m = CMat::zeros(dim, dim);
    for b in 0..dim {
        let out = if (b >> control) & 1 == 1 { b ^ (1 << target) } else { b };
        m[(out, b)] = c(1.0, 0.0);
    }
    m
}

pub fn gate_matrix(g: &Gate, n: usize) -> CMat {
    match *g {
        Gate::H { target } => embed(&hadamard(), target, n),
        Gate::Ry { target, angle } => embed(&ry(angle), target, n),
        Gate::Rz { target, angle } => embed(&rz(angle), target, n),
        Gate::Cnot { control, target } => cnot(control, target, n),
    }
}

pub fn circuit_unitary(gates: &[Gate], n: usize) -> CMat {
    gates.iter().fold(CMat::identity(1 << n, 1 << n), |acc, g| gate_matrix(g, n) * acc)
}

pub fn ground(n: usize) -> CVec {
    let mut v = CVec::zeros(1 << n);
    v[0] = c(1.0, 0.0);
    v
}

pub fn run_dense(gates: &[Gate], n: usize) -> CVec {
    gates.iter().fold(ground(n), |v, g| gate_matrix(g, n) * v)
}

pub fn random_gate(rng: &mut impl Rng, n: usize) -> Gate {
    let target = rng.random_range(0..n);
    let angle = rng.random_range(-2.0 * std::f64::consts::PI..2.0 * std::f64::consts::PI);
    match if n >= 2 { rng.random_range(0..4) } else { rng.random_range(0..3) } {
        0 => Gate::H { target },
        1 => Gate::Ry { target, angle },
        2 => Gate::Rz { target, angle },
        _ => {
            let mut control = rng.random_range(0..n - 1);
            if control >= target {
                control += 1;
            }
            Gate::Cnot { control, target }
        }
    }
}

pub fn random_circuit(seed: u64, max_qubits: usize, max_gates: usize) -> (usize, Vec<Gate>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_qubits);
    let len = rng.random_range(0..=max_gates);
    (n, (0..len).map(|_| random_gate(&mut rng, n)).collect())
}

/// ZZ feature-map state in closed form. Each repetition applies `H^{⊗n}`
/// and then the diagonal phase
/// `exp(−i/2 · (Σ_q f_q z_q + α Σ_{(j,k)} f_j f_k z_j z_k))`, where
/// `z = +1` for bit 0 and `−1` for bit 1.
pub fn zz_state_closed_form(x: &[f64], n: usize, alpha: f64, reps: usize, pairs: &[(usize, usize)]) -> CVec {
    let r = n / x.len();
    let f = |q: usize| x[q / r];
    let h_all = (0..n).fold(CMat::identity(1, 1), |m, _| m.kronecker(&hadamard()));
    let dim = 1 << n;
    let phase: Vec<Complex64> = (0..dim)
        .map(|b| {
            let z = |q: usize| if (b >> q) & 1 == 0 { 1.0 } else { -1.0 };
            let single: f64 = (0..n).map(|q| f(q) * z(q)).sum();
            let double: f64 = pairs.iter().map(|&(j, k)| alpha * f(j) * f(k) * z(j) * z(k)).sum();
            Complex64::from_polar(1.0, -0.5 * (single + double))
        })
        .collect();
    let mut v = ground(n);
    for _ in 0..reps {
        v = &h_all * v;
        for b in 0..dim {
            v[b] *= phase[b];
        }
    }
    v
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_eigenvalue(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    m.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn random_rows(seed: u64, n: usize, d: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..d).map(|_| rng.random_range(lo..hi)).collect()).collect()
}

/// Scale to [0, π/2] per feature and L2-normalize rows, as the quantum
/// pipeline does, written out longhand.
pub fn quantum_preprocess(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = rows[0].len();
    let lo: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
    rows.iter()
        .map(|r| {
            let s: Vec<f64> = (0..d)
                .map(|j| if hi[j] > lo[j] { (r[j] - lo[j]) / (hi[j] - lo[j]) * std::f64::consts::FRAC_PI_2 } else { 0.0 })
                .collect();
            let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 { s } else { s.iter().map(|v| v / norm).collect() }
        })
        .collect()
}

/// Exact soft-margin SVM dual by enumerating which multipliers sit at 0,
/// at their bound, or strictly inside. For each pattern the free set is
/// solved from the KKT linear system
/// `[Q_FF  y_F; y_Fᵀ 0] [α_F; b] = [1 − Q_FB α_B; −y_Bᵀ α_B]`,
/// and the feasible, KKT-satisfying pattern with the lowest objective wins.
/// Returns `(α, b)`.
pub fn reference_dual(k: &[Vec<f64>], y: &[f64], c: &[f64]) -> (Vec<f64>, f64) {
    let n = y.len();
    assert!(n <= 9, "3^n enumeration");
    let q = |i: usize, j: usize| y[i] * y[j] * k[i][j];
    let objective = |a: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += 0.5 * a[i] * a[j] * q(i, j);
            }
        }
        s - a.iter().sum::<f64>()
    };
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for code in 0..3usize.pow(n as u32) {
        let state: Vec<usize> = (0..n).map(|i| (code / 3usize.pow(i as u32)) % 3).collect();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut a: Vec<f64> = (0..n).map(|i| if state[i] == 1 { c[i] } else { 0.0 }).collect();
        let m = free.len();
        let mut b = None;
        if m > 0 {
            let mut mat = DMatrix::<f64>::zeros(m + 1, m + 1);
            let mut rhs = DVector::<f64>::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    mat[(r, s)] = q(i, j);
                }
                mat[(r, m)] = y[i];
                mat[(m, r)] = y[i];
                rhs[r] = 1.0 - (0..n).filter(|&j| state[j] == 1).map(|j| q(i, j) * a[j]).sum::<f64>();
            }
            rhs[m] = -(0..n).filter(|&j| state[j] == 1).map(|j| y[j] * a[j]).sum::<f64>();
            let Some(sol) = mat.lu().solve(&rhs) else { continue };
            if free.iter().enumerate().any(|(r, &i)| sol[r] <= 1e-12 || sol[r] >= c[i] - 1e-12) {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                a[i] = sol[r];
            }
            // The multiplier of the equality constraint is the bias itself.
            b = Some(sol[m]);
        }
        if (0..n).map(|i| y[i] * a[i]).sum::<f64>().abs() > 1e-9 {
            continue;
        }
        let grad: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q(i, j) * a[j]).sum::<f64>() - 1.0).collect();
        // KKT in terms of the margin: y_i f(x_i) = grad_i + 1 + y_i b.
        let bias = match b {
            Some(b) => b,
            None => {
                // No free vector: any b in the feasible interval; take its midpoint.
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for i in 0..n {
                    // at 0: y_i f ≥ 1 ⇒ y_i b ≥ −grad_i ; at C: y_i b ≤ −grad_i
                    let bound = -grad[i] * y[i];
                    let lower = (state[i] == 0) == (y[i] > 0.0);
                    if lower {
                        lo = lo.max(bound);
                    } else {
                        hi = hi.min(bound);
                    }
                }
                if lo > hi + 1e-9 {
                    continue;
                }
                match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (true, false) => lo,
                    (false, true) => hi,
                    _ => 0.0,
                }
            }
        };
        let ok = (0..n).all(|i| {
            let margin = grad[i] + y[i] * bias;
            match state[i] {
                0 => margin >= -1e-9,
                1 => margin <= 1e-9,
                _ => margin.abs() <= 1e-7,
            }
        });
        if !ok {
            continue;
        }
        let obj = objective(&a);
        if best.as_ref().is_none_or(|(o, _, _)| obj < *o - 1e-12) {
            best = Some((obj, a, bias));
        }
    }
    let (_, a, b) = best.expect("a KKT point exists");
    (a, b)
}

/// Linearly separable binary set (alternating labels) whose separating
/// feature `x3` crosses the sign change of `cos(x3)`, which the TTN readout
/// can express. The other features stay small.
pub fn separable_set(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = (i % 2) as u8;
        let mut row: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..0.2)).collect();
        row[3] = if label == 1 { rng.random_range(2.7..3.1) } else { rng.random_range(0.0..1.2) };
        x.push(row);
        y.push(label);
    }
    (x, y)
}

/// The 8-qubit tree ansatz written out gate by gate.
pub fn ttn8_gates(theta: &[f64]) -> Vec<Gate> {
    let mut g = Vec::new();
    for q in 0..8 {
        g.push(Gate::Ry { target: q, angle: theta[2 * q] });
        g.push(Gate::Ry { target: q, angle: theta[2 * q + 1] });
    }
    for (control, target) in [(0, 1), (2, 3), (4, 5), (6, 7), (1, 3), (5, 7), (3, 7)] {
        g.push(Gate::Cnot { control, target });
    }
    for q in 0..8 {
        g.push(Gate::Ry { target: q, angle: theta[16 + q] });
    }
    g
}

/// ⟨Z_q⟩ of a dense state.
pub fn dense_z(v: &CVec, q: usize) -> f64 {
    v.iter().enumerate().map(|(b, a)| if (b >> q) & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() }).sum()
}

/// Straight-line forward pass and regularized mean BCE, independent of the
/// library's trace/backprop code. Also returns the smallest |pre-activation|
/// over hidden units, to keep finite differences away from ReLU kinks.
pub fn reference_loss(
    params: &[f64],
    xs: &[Vec<f64>],
    ys: &[u8],
    l2: f64,
    masks: Option<&[DropoutMasks]>,
    rate: f64,
) -> (f64, f64) {
    let mut total = 0.0;
    let mut closest_kink = f64::INFINITY;
    for (s, (x, &y)) in xs.iter().zip(ys).enumerate() {
        let mut a = x.clone();
        let mut offset = 0;
        for (li, w) in LAYER_SIZES.windows(2).enumerate() {
            let (nin, nout) = (w[0], w[1]);
            let weights = &params[offset..offset + nin * nout];
            let biases = &params[offset + nin * nout..offset + nin * nout + nout];
            offset += nin * nout + nout;
            let z: Vec<f64> =
                (0..nout).map(|o| (0..nin).map(|i| weights[o * nin + i] * a[i]).sum::<f64>() + biases[o]).collect();
            if li == LAYER_SIZES.len() - 2 {
                let p = 1.0 / (1.0 + (-z[0]).exp());
                total += if y == 1 { -p.ln() } else { -(1.0 - p).ln() };
            } else {
                closest_kink = z.iter().fold(closest_kink, |m, v| m.min(v.abs()));
                a = z.iter().map(|v| v.max(0.0)).collect();
                if let Some(m) = masks {
                    for (i, v) in a.iter_mut().enumerate() {
                        *v = if m[s][li][i] { *v / (1.0 - rate) } else { 0.0 };
                    }
                }
            }
        }
    }
    let mut sq = 0.0;
    let mut offset = 0;
    for w in LAYER_SIZES.windows(2) {
        sq += params[offset..offset + w[0] * w[1]].iter().map(|v| v * v).sum::<f64>();
        offset += w[0] * w[1] + w[1];
    }
    (total / xs.len() as f64 + l2 * sq, closest_kink)
}
