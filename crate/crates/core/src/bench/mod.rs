//! Metrics, cross-validation, the five-model comparison and its reports.

pub mod compare;
pub mod cv;
pub mod metrics;
pub mod models;
pub mod report;
mod svg;

pub use compare::{compare_models, compare_on, fit_and_score};
pub use cv::{cross_validate, cross_validate_with, CvResult};
pub use metrics::{classification_metrics, classification_metrics_for, generalization_gap, ClassMetrics, Metrics};
pub use models::{fit, ModelKind, TrainedModel};
pub use report::{EvalReport, ModelRecord, Status};
