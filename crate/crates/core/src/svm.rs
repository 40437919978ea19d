//! Soft-margin SVM on a precomputed kernel matrix.
//!
//! The dual
//!
//! ```text
//! min_α  ½ αᵀQα − eᵀα   s.t.  yᵀα = 0,  0 ≤ α_i ≤ C_i,   Q_ij = y_i y_j K_ij
//! ```
//!
//! is solved by pairwise coordinate descent (SMO). Each step picks the
//! maximal-violating index `i` and the partner `j` with the largest
//! second-order decrease, scanning indices in a seeded order so that ties
//! resolve deterministically.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qkernel::KernelMatrix;

const TAU: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeighting {
    None,
    #[default]
    Balanced,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub c: f64,
    pub class_weighting: ClassWeighting,
    /// Stop once the maximal KKT violation drops below this.
    pub tolerance: f64,
    /// Iteration cap is `max_passes · n`; `None` means `10 · n` passes.
    pub max_passes: Option<usize>,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 0.5,
            class_weighting: ClassWeighting::Balanced,
            tolerance: 1e-3,
            max_passes: None,
            seed: 0,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Validation(format!("SVM C must be positive, got {}", self.c)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Validation(format!("SVM tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_passes == Some(0) {
            return Err(Error::Validation("max_passes must be >= 1".into()));
        }
        Ok(())
    }
}

/// `weight(c) = n_total / (n_classes · n_c)` for every class present.
pub fn balanced_class_weights<L: Ord + Copy>(labels: &[L]) -> Result<BTreeMap<L, f64>> {
    if labels.is_empty() {
        return Err(Error::Shape("class weights of an empty label set".into()));
    }
    let mut counts = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    let n_total = labels.len() as f64;
    let n_classes = counts.len() as f64;
    Ok(counts.into_iter().map(|(l, n)| (l, n_total / (n_classes * n as f64))).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    /// `α_i · y_i` for every training sample (zero off the support set).
    pub dual_coef: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Per-sample box bound `C_i` after class weighting.
    pub upper_bounds: Vec<f64>,
    pub bias: f64,
    pub support: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    /// Maximal KKT violation at exit (`m(α) − M(α)`).
    pub kkt_violation: f64,
    /// Pair updates that met a non-positive curvature (indefinite kernel).
    pub indefinite_steps: usize,
    pub config: SvmConfig,
}

impl SvmModel {
    pub fn n_train(&self) -> usize {
        self.dual_coef.len()
    }

    /// `Σ α_i y_i K(x, x_i) + b` for each row of test-vs-train kernel values.
    pub fn decision_values(&self, k_cross: &[Vec<f64>]) -> Result<Vec<f64>> {
        k_cross
            .iter()
            .enumerate()
            .map(|(r, row)| {
                if row.len() != self.n_train() {
                    return Err(Error::Shape(format!(
                        "cross-kernel row {r} has {} columns, model was trained on {}",
                        row.len(),
                        self.n_train()
                    )));
                }
                Ok(self.support.iter().map(|&i| self.dual_coef[i] * row[i]).sum::<f64>() + self.bias)
            })
            .collect()
    }

    /// `+1` where the decision value is strictly positive, `−1` otherwise.
    pub fn predict(&self, k_cross: &[Vec<f64>]) -> Result<Vec<i32>> {
        Ok(self.decision_values(k_cross)?.into_iter().map(sign_label).collect())
    }

    /// Decision values for the training samples themselves.
    pub fn training_decisions(&self, k: &KernelMatrix) -> Result<Vec<f64>> {
        let rows: Vec<Vec<f64>> = k.rows().map(<[f64]>::to_vec).collect();
        self.decision_values(&rows)
    }
}

fn sign_label(d: f64) -> i32 {
    if d > 0.0 {
        1
    } else {
        -1
    }
}

fn check_signed_labels(labels: &[i32]) -> Result<()> {
    if let Some(i) = labels.iter().position(|&l| l != 1 && l != -1) {
        return Err(Error::Validation(format!("label {} at {i} is not ±1", labels[i])));
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(Error::Degenerate("SVM training needs both classes present".into()));
    }
    Ok(())
}

/// Trains a binary SVM on labels in `{−1, +1}`.
pub fn train_svm(k: &KernelMatrix, labels: &[i32], config: &SvmConfig) -> Result<SvmModel> {
    config.validate()?;
    let n = k.len();
    if labels.len() != n {
        return Err(Error::Shape(format!("{} labels for a {n}×{n} kernel", labels.len())));
    }
    check_signed_labels(labels)?;

    let upper_bounds: Vec<f64> = match config.class_weighting {
        ClassWeighting::None => vec![config.c; n],
        ClassWeighting::Balanced => {
            let w = balanced_class_weights(labels)?;
            labels.iter().map(|l| config.c * w[l]).collect()
        }
    };
    let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));

    let mut alpha = vec![0.0; n];
    // Gradient of the dual objective: G = Qα − e.
    let mut grad = vec![-1.0; n];
    let in_up = |t: usize, a: &[f64]| {
        (y[t] > 0.0 && a[t] < upper_bounds[t]) || (y[t] < 0.0 && a[t] > 0.0)
    };
    let in_low = |t: usize, a: &[f64]| {
        (y[t] < 0.0 && a[t] < upper_bounds[t]) || (y[t] > 0.0 && a[t] > 0.0)
    };

    let max_iter = config.max_passes.unwrap_or(10 * n).saturating_mul(n).max(1);
    let mut iterations = 0;
    let mut converged = false;
    let mut kkt_violation = f64::INFINITY;
    let mut indefinite_steps = 0;

    while iterations < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut sel_i = None;
        for &t in &order {
            if in_up(t, &alpha) && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                sel_i = Some(t);
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut sel_j = None;
        let mut best_obj = f64::INFINITY;
        if let Some(i) = sel_i {
            for &t in &order {
                if !in_low(t, &alpha) {
                    continue;
                }
                gmax2 = gmax2.max(y[t] * grad[t]);
                let b = gmax + y[t] * grad[t];
                if b > 0.0 {
                    let mut a = k.get(i, i) + k.get(t, t) - 2.0 * k.get(i, t);
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let obj = -(b * b) / a;
                    if obj < best_obj {
                        best_obj = obj;
                        sel_j = Some(t);
                    }
                }
            }
        }
        kkt_violation = (gmax + gmax2).max(0.0);
        let (i, j) = match (sel_i, sel_j) {
            (Some(i), Some(j)) if gmax + gmax2 >= config.tolerance => (i, j),
            _ => {
                converged = true;
                break;
            }
        };
        iterations += 1;

        let (ci, cj) = (upper_bounds[i], upper_bounds[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = k.get(i, i) + k.get(j, j) - 2.0 * k.get(i, j);
        if quad <= 0.0 {
            quad = TAU;
            indefinite_steps += 1;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        // `sum - ci` and friends can land one ulp outside the box
        alpha[i] = alpha[i].clamp(0.0, ci);
        alpha[j] = alpha[j].clamp(0.0, cj);

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k.get(t, i) * di + y[j] * k.get(t, j) * dj);
        }
    }

    // b = −ρ, ρ averaged over free vectors, midpoint of the feasible
    // interval when none are free.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= upper_bounds[t] {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            free_sum += yg;
        }
    }
    let rho = if n_free > 0 { free_sum / n_free as f64 } else { (ub + lb) / 2.0 };

    let dual_coef: Vec<f64> = alpha.iter().zip(&y).map(|(a, y)| a * y).collect();
    let support = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    Ok(SvmModel {
        dual_coef,
        alphas: alpha,
        upper_bounds,
        bias: -rho,
        support,
        iterations,
        converged,
        kkt_violation,
        indefinite_steps,
        config: config.clone(),
    })
}

/// One-vs-rest reduction. With exactly two classes this holds a single
/// binary model whose positive class is the larger label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MulticlassSvm {
    pub classes: Vec<usize>,
    pub models: Vec<SvmModel>,
}

impl MulticlassSvm {
    /// Per-class decision values: one row per test sample, one column per
    /// class. For the binary case column 0 is the negated decision.
    pub fn decision_values(&self, k_cross: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if self.classes.len() == 2 {
            let d = self.models[0].decision_values(k_cross)?;
            return Ok(d.into_iter().map(|v| vec![-v, v]).collect());
        }
        let per_model = self
            .models
            .iter()
            .map(|m| m.decision_values(k_cross))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..k_cross.len()).map(|r| per_model.iter().map(|d| d[r]).collect()).collect())
    }

    pub fn predict(&self, k_cross: &[Vec<f64>]) -> Result<Vec<usize>> {
        if self.classes.len() == 2 {
            let pred = self.models[0].predict(k_cross)?;
            return Ok(pred.into_iter().map(|l| self.classes[usize::from(l > 0)]).collect());
        }
        Ok(self
            .decision_values(k_cross)?
            .iter()
            .map(|row| self.classes[argmax_lowest(row)])
            .collect())
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn train_multiclass(k: &KernelMatrix, labels: &[usize], config: &SvmConfig) -> Result<MulticlassSvm> {
    if labels.len() != k.len() {
        return Err(Error::Shape(format!("{} labels for a {}-sample kernel", labels.len(), k.len())));
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Degenerate("multiclass SVM needs at least two classes".into()));
    }
    let one_vs_rest = |positive: usize| -> Vec<i32> {
        labels.iter().map(|&l| if l == positive { 1 } else { -1 }).collect()
    };
    let models = if classes.len() == 2 {
        vec![train_svm(k, &one_vs_rest(classes[1]), config)?]
    } else {
        classes
            .iter()
            .map(|&c| train_svm(k, &one_vs_rest(c), config))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(MulticlassSvm { classes, models })
}
