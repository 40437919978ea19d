//! Experiment configuration (JSON). Every field except `seeds` has a
//! default; the effective config is echoed into each report.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::classical_nn::TrainConfig;
use crate::data::{synth_generate, Dataset, SynthParams, Task};
use crate::encodings::{FeatureMapSpec, MapKind};
use crate::error::{Error, Result};
use crate::qnn::{QnnTrainConfig, Readout, TtnAnsatzSpec};
use crate::svm::{ClassWeighting, SvmConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
    },
    Generator {
        n: usize,
        seed: u64,
        #[serde(default)]
        params: SynthParams,
    },
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Generator { n: 1000, seed: 7, params: SynthParams::default() }
    }
}

impl DatasetSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetSource::Csv { path } => Dataset::load_csv(path),
            DatasetSource::Generator { n, seed, params } => synth_generate(*n, *seed, params),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    /// Row sampling, train/test split, fold assignment and SMO tie order.
    pub sampling: u64,
    /// Weight and ansatz initialization.
    pub init: u64,
    /// Dropout masks and mini-batch shuffling.
    pub dropout: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self { sampling: 42, init: 7, dropout: 11 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmSection {
    pub c: f64,
    pub gamma: f64,
    pub class_weighting: ClassWeighting,
    pub tolerance: f64,
}

impl Default for SvmSection {
    fn default() -> Self {
        Self { c: 0.5, gamma: 2.0, class_weighting: ClassWeighting::Balanced, tolerance: 1e-3 }
    }
}

impl SvmSection {
    pub fn solver(&self, seed: u64) -> SvmConfig {
        SvmConfig {
            c: self.c,
            class_weighting: self.class_weighting,
            tolerance: self.tolerance,
            max_passes: None,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QnnSection {
    pub ansatz: TtnAnsatzSpec,
    pub feature_map: FeatureMapSpec,
    pub readout: Readout,
    pub threshold: f64,
    #[serde(flatten)]
    pub train: QnnTrainConfig,
}

impl Default for QnnSection {
    fn default() -> Self {
        Self {
            ansatz: TtnAnsatzSpec::default(),
            feature_map: FeatureMapSpec::zz(8),
            readout: Readout::Affine,
            threshold: 0.5,
            train: QnnTrainConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
    Svg,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "svg" => Ok(ReportFormat::Svg),
            other => Err(Error::Validation(format!("unknown report format `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub formats: Vec<ReportFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("report"), formats: vec![ReportFormat::Json, ReportFormat::Csv, ReportFormat::Svg] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub dataset: DatasetSource,
    #[serde(default = "default_sample_n")]
    pub sample_n: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub task: Task,
    /// Required: a config without explicit seeds is rejected.
    pub seeds: Seeds,
    #[serde(default)]
    pub svm: SvmSection,
    #[serde(default)]
    pub qsvm: FeatureMapSpec,
    #[serde(default)]
    pub qnn: QnnSection,
    #[serde(default)]
    pub nn: TrainConfig,
    /// Share of the training rows held out for NN early stopping.
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
    /// Folds for the feature-map cross-validation panel; 0 disables it.
    #[serde(default = "default_cv_folds")]
    pub cv_folds: usize,
    #[serde(default = "default_true")]
    pub compare_feature_maps: bool,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_sample_n() -> usize {
    100
}
fn default_train_fraction() -> f64 {
    0.8
}
fn default_validation_fraction() -> f64 {
    0.2
}
fn default_cv_folds() -> usize {
    5
}
fn default_true() -> bool {
    true
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSource::default(),
            sample_n: default_sample_n(),
            train_fraction: default_train_fraction(),
            task: Task::Binary,
            seeds: Seeds::default(),
            svm: SvmSection::default(),
            qsvm: FeatureMapSpec::zz(8),
            qnn: QnnSection::default(),
            nn: TrainConfig::default(),
            validation_fraction: default_validation_fraction(),
            cv_folds: default_cv_folds(),
            compare_feature_maps: true,
            output: OutputSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if let DatasetSource::Csv { path } = &self.dataset {
            if !path.is_file() {
                return Err(Error::Validation(format!("dataset file {} does not exist", path.display())));
            }
        }
        if let DatasetSource::Generator { n, params, .. } = &self.dataset {
            if *n < self.sample_n {
                return Err(Error::Validation(format!("generator n={n} is smaller than sample_n={}", self.sample_n)));
            }
            params.validate()?;
        }
        if self.sample_n < 2 {
            return Err(Error::Validation("sample_n must be >= 2".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Validation(format!("train_fraction {} outside (0, 1)", self.train_fraction)));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::Validation(format!(
                "validation_fraction {} outside (0, 1)",
                self.validation_fraction
            )));
        }
        if self.cv_folds == 1 {
            return Err(Error::Validation("cv_folds must be 0 (off) or >= 2".into()));
        }
        if !(self.svm.gamma > 0.0) {
            return Err(Error::Validation(format!("svm.gamma must be positive, got {}", self.svm.gamma)));
        }
        self.svm.solver(0).validate()?;
        self.qsvm.validate()?;
        self.qsvm.check_features(4)?;
        self.qnn.ansatz.validate()?;
        self.qnn.feature_map.validate()?;
        if self.qnn.feature_map.kind != MapKind::Zz {
            return Err(Error::Validation("qnn.feature_map must be a zz map".into()));
        }
        self.qnn.feature_map.check_features(4)?;
        if !(self.qnn.threshold > 0.0 && self.qnn.threshold < 1.0) {
            return Err(Error::Validation("qnn.threshold must lie in (0, 1)".into()));
        }
        if !(self.qnn.train.learning_rate > 0.0) {
            return Err(Error::Validation("qnn.learning_rate must be positive".into()));
        }
        self.nn.validate()?;
        Ok(())
    }
}
