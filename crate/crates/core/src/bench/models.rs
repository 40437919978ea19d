//! Uniform fit/predict over the five classifiers. A [`TrainedModel`] carries
//! its fitted preprocessing, so it can be saved and applied to raw feature
//! rows later.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classical_nn::{train_mlp, MlpModel, TrainHistory};
use crate::config::ExperimentConfig;
use crate::data::{stratified_holdout, PipelineKind, Preprocessor, Task};
use crate::encodings::FeatureMapSpec;
use crate::error::{Error, Result};
use crate::qkernel::{cross_kernel, kernel_matrix, Kernel};
use crate::qnn::{train_qnn, QnnModel};
use crate::svm::{train_multiclass, MulticlassSvm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LinearSvm,
    RbfSvm,
    Qsvm,
    Nn,
    Qnn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] =
        [ModelKind::LinearSvm, ModelKind::RbfSvm, ModelKind::Qsvm, ModelKind::Nn, ModelKind::Qnn];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::LinearSvm => "linear_svm",
            ModelKind::RbfSvm => "rbf_svm",
            ModelKind::Qsvm => "qsvm",
            ModelKind::Nn => "nn",
            ModelKind::Qnn => "qnn",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::LinearSvm => "Linear SVM",
            ModelKind::RbfSvm => "RBF SVM",
            ModelKind::Qsvm => "QSVM",
            ModelKind::Nn => "Classical NN",
            ModelKind::Qnn => "QNN",
        }
    }

    pub fn pipeline(self) -> PipelineKind {
        match self {
            ModelKind::Qsvm | ModelKind::Qnn => PipelineKind::Quantum,
            _ => PipelineKind::Classical,
        }
    }

    /// The networks are binary-only; the SVMs follow the configured task.
    pub fn effective_task(self, task: Task) -> Task {
        match self {
            ModelKind::Nn | ModelKind::Qnn => Task::Binary,
            _ => task,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| Error::Validation(format!("unknown model `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelBody {
    Svm {
        kernel: Kernel,
        /// Preprocessed training rows, needed for test-vs-train kernels.
        support_rows: Vec<Vec<f64>>,
        model: MulticlassSvm,
    },
    Nn {
        model: MlpModel,
        history: TrainHistory,
    },
    Qnn {
        model: QnnModel,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub task: Task,
    pub preprocessor: Preprocessor,
    pub body: ModelBody,
}

impl TrainedModel {
    pub fn predict(&self, raw: &[Vec<f64>]) -> Result<Vec<usize>> {
        let x = self.preprocessor.transform(raw)?;
        match &self.body {
            ModelBody::Svm { kernel, support_rows, model } => {
                if x.is_empty() {
                    return Ok(Vec::new());
                }
                model.predict(&cross_kernel(&x, support_rows, kernel)?)
            }
            ModelBody::Nn { model, .. } => x.iter().map(|r| model.predict(r).map(usize::from)).collect(),
            ModelBody::Qnn { model } => x.iter().map(|r| model.predict(r).map(usize::from)).collect(),
        }
    }

    /// Trainable parameters. For SVMs: one dual coefficient per support
    /// vector plus one bias, summed over the binary sub-models.
    pub fn param_count(&self) -> usize {
        match &self.body {
            ModelBody::Svm { model, .. } => model.models.iter().map(|m| m.support.len() + 1).sum(),
            ModelBody::Nn { model, .. } => model.param_count(),
            ModelBody::Qnn { model } => model.param_count(),
        }
    }
}

/// Kernel used by each SVM variant under `cfg`.
pub fn svm_kernel(kind: ModelKind, cfg: &ExperimentConfig) -> Option<Kernel> {
    match kind {
        ModelKind::LinearSvm => Some(Kernel::Linear),
        ModelKind::RbfSvm => Some(Kernel::Rbf { gamma: cfg.svm.gamma }),
        ModelKind::Qsvm => Some(Kernel::Quantum(cfg.qsvm.clone())),
        _ => None,
    }
}

fn to_binary_labels(labels: &[usize]) -> Result<Vec<u8>> {
    labels
        .iter()
        .map(|&l| match l {
            0 | 1 => Ok(l as u8),
            _ => Err(Error::Validation(format!("label {l} is not binary"))),
        })
        .collect()
}

/// Fits `kind` on raw training rows. `labels` must already follow
/// `kind.effective_task(cfg.task)`.
pub fn fit(kind: ModelKind, cfg: &ExperimentConfig, raw: &[Vec<f64>], labels: &[usize]) -> Result<TrainedModel> {
    if raw.len() != labels.len() {
        return Err(Error::Shape(format!("{} rows with {} labels", raw.len(), labels.len())));
    }
    let preprocessor = Preprocessor::fit(kind.pipeline(), raw)?;
    let x = preprocessor.transform(raw)?;
    let task = kind.effective_task(cfg.task);
    let body = match kind {
        ModelKind::LinearSvm | ModelKind::RbfSvm | ModelKind::Qsvm => {
            let kernel = svm_kernel(kind, cfg).expect("SVM kinds have kernels");
            fit_svm(kernel, x, labels, cfg)?
        }
        ModelKind::Nn => {
            let ys = to_binary_labels(labels)?;
            let idx: Vec<usize> = (0..x.len()).collect();
            let holdout = stratified_holdout(&idx, labels, cfg.validation_fraction, cfg.seeds.sampling)?;
            let pick = |ids: &[usize]| -> (Vec<Vec<f64>>, Vec<u8>) {
                (ids.iter().map(|&i| x[i].clone()).collect(), ids.iter().map(|&i| ys[i]).collect())
            };
            let (tx, ty) = pick(&holdout.train);
            let (vx, vy) = pick(&holdout.test);
            let train_cfg = crate::classical_nn::TrainConfig { seed: cfg.seeds.dropout, ..cfg.nn.clone() };
            let (model, history) =
                train_mlp(MlpModel::build(cfg.seeds.init), (&tx, &ty), (&vx, &vy), &train_cfg)?;
            ModelBody::Nn { model, history }
        }
        ModelKind::Qnn => {
            let ys = to_binary_labels(labels)?;
            let mut model = QnnModel::new(cfg.qnn.ansatz.clone(), cfg.qnn.feature_map.clone(), cfg.seeds.init)?;
            model.readout = cfg.qnn.readout;
            model.threshold = cfg.qnn.threshold;
            ModelBody::Qnn { model: train_qnn(&x, &ys, model, &cfg.qnn.train)? }
        }
    };
    Ok(TrainedModel { kind, task, preprocessor, body })
}

fn fit_svm(kernel: Kernel, x: Vec<Vec<f64>>, labels: &[usize], cfg: &ExperimentConfig) -> Result<ModelBody> {
    let k = kernel_matrix(&x, &kernel)?;
    let model = train_multiclass(&k, labels, &cfg.svm.solver(cfg.seeds.sampling))?;
    Ok(ModelBody::Svm { kernel, support_rows: x, model })
}

/// QSVM with an arbitrary feature map, for the feature-map comparison.
pub fn fit_qsvm_with(map: FeatureMapSpec, cfg: &ExperimentConfig, raw: &[Vec<f64>], labels: &[usize]) -> Result<TrainedModel> {
    let preprocessor = Preprocessor::fit(PipelineKind::Quantum, raw)?;
    let x = preprocessor.transform(raw)?;
    let body = fit_svm(Kernel::Quantum(map), x, labels, cfg)?;
    Ok(TrainedModel { kind: ModelKind::Qsvm, task: cfg.task, preprocessor, body })
}
