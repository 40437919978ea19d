//! The head-to-head experiment: one sample, one split, five models.

use std::collections::BTreeMap;

use serde_json::json;

use super::cv::{cross_validate_trainer, CvResult};
use super::metrics::{classification_metrics_for, generalization_gap, to_percent};
use super::models::{fit, fit_qsvm_with, ModelKind, TrainedModel};
use super::report::{EvalReport, FeatureMapRecord, ModelRecord, ModelScores, SplitSummary, Status, SCHEMA_VERSION};
use crate::config::ExperimentConfig;
use crate::data::{sample_and_split, Dataset, Split};
use crate::encodings::{FeatureMapSpec, MapKind};
use crate::error::Result;
use crate::par;

/// Rows and labels of `indices`.
pub fn select(dataset: &Dataset, indices: &[usize], labels: &[usize]) -> (Vec<Vec<f64>>, Vec<usize>) {
    let features = dataset.features();
    (indices.iter().map(|&i| features[i].clone()).collect(), indices.iter().map(|&i| labels[i]).collect())
}

/// The split every model in an experiment shares. Stratified on the
/// configured task's labels.
pub fn experiment_split(dataset: &Dataset, cfg: &ExperimentConfig) -> Result<Split> {
    sample_and_split(&dataset.labels(cfg.task), cfg.sample_n, cfg.train_fraction, cfg.seeds.sampling)
}

/// Scores a fitted model on train and test rows.
pub fn score(
    model: &TrainedModel,
    train: (&[Vec<f64>], &[usize]),
    test: (&[Vec<f64>], &[usize]),
) -> Result<ModelScores> {
    let classes: Vec<usize> = (0..model.task.n_classes()).collect();
    let train_m = classification_metrics_for(&model.predict(train.0)?, train.1, &classes)?;
    let test_m = classification_metrics_for(&model.predict(test.0)?, test.1, &classes)?;
    let train_accuracy = to_percent(train_m.accuracy);
    let test_accuracy = to_percent(test_m.accuracy);
    Ok(ModelScores {
        train_accuracy,
        test_accuracy,
        generalization_gap: generalization_gap(train_accuracy, test_accuracy)?,
        per_class: test_m.per_class,
        macro_precision: test_m.macro_precision,
        macro_recall: test_m.macro_recall,
        macro_f1: test_m.macro_f1,
        weighted_precision: test_m.weighted_precision,
        weighted_recall: test_m.weighted_recall,
        weighted_f1: test_m.weighted_f1,
        parameter_count: model.param_count(),
    })
}

/// Seed that drives a model's own randomness.
pub fn model_seed(kind: ModelKind, cfg: &ExperimentConfig) -> u64 {
    match kind {
        ModelKind::Nn | ModelKind::Qnn => cfg.seeds.init,
        _ => cfg.seeds.sampling,
    }
}

/// Hyperparameters relevant to one model, as echoed in its record.
pub fn model_config(kind: ModelKind, cfg: &ExperimentConfig) -> serde_json::Value {
    match kind {
        ModelKind::LinearSvm => json!({ "kernel": "linear", "svm": cfg.svm }),
        ModelKind::RbfSvm => json!({ "kernel": "rbf", "svm": cfg.svm }),
        ModelKind::Qsvm => json!({ "kernel": "quantum", "feature_map": cfg.qsvm, "svm": cfg.svm }),
        ModelKind::Nn => json!({
            "nn": cfg.nn,
            "validation_fraction": cfg.validation_fraction,
            "seeds": cfg.seeds,
        }),
        ModelKind::Qnn => json!({ "qnn": cfg.qnn, "seeds": cfg.seeds }),
    }
}

/// Fits and scores one model on a fixed split.
pub fn fit_and_score(
    kind: ModelKind,
    cfg: &ExperimentConfig,
    dataset: &Dataset,
    split: &Split,
) -> Result<(TrainedModel, ModelScores)> {
    let labels = dataset.labels(kind.effective_task(cfg.task));
    let (xtr, ytr) = select(dataset, &split.train, &labels);
    let (xte, yte) = select(dataset, &split.test, &labels);
    let model = fit(kind, cfg, &xtr, &ytr)?;
    let scores = score(&model, (&xtr, &ytr), (&xte, &yte))?;
    Ok((model, scores))
}

fn record(kind: ModelKind, cfg: &ExperimentConfig, dataset: &Dataset, split: &Split) -> ModelRecord {
    let outcome = fit_and_score(kind, cfg, dataset, split);
    let (status, error, scores) = match outcome {
        Ok((_, s)) => (Status::Ok, None, Some(s)),
        Err(e) => {
            log::warn!("{kind} failed: {e}");
            (Status::Failed, Some(e.to_string()), None)
        }
    };
    ModelRecord {
        model: kind,
        task: kind.effective_task(cfg.task),
        status,
        error,
        scores,
        seed: model_seed(kind, cfg),
        config: model_config(kind, cfg),
    }
}

/// Maps compared in the feature-map panel: angle on 4 qubits, amplitude on
/// 2 and the configured QSVM map.
pub fn comparison_maps(cfg: &ExperimentConfig) -> Vec<FeatureMapSpec> {
    vec![FeatureMapSpec::angle(4), FeatureMapSpec::amplitude(2), cfg.qsvm.clone()]
}

fn map_name(spec: &FeatureMapSpec) -> &'static str {
    match spec.kind {
        MapKind::Angle => "angle",
        MapKind::Amplitude => "amplitude",
        MapKind::Zz => "zz",
    }
}

fn feature_map_record(spec: &FeatureMapSpec, cfg: &ExperimentConfig, dataset: &Dataset, split: &Split) -> FeatureMapRecord {
    let labels = dataset.labels(cfg.task);
    let run = || -> Result<(ModelScores, Option<CvResult>)> {
        let (xtr, ytr) = select(dataset, &split.train, &labels);
        let (xte, yte) = select(dataset, &split.test, &labels);
        let model = fit_qsvm_with(spec.clone(), cfg, &xtr, &ytr)?;
        let scores = score(&model, (&xtr, &ytr), (&xte, &yte))?;
        let cv = if cfg.cv_folds >= 2 {
            let mut all: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
            all.sort_unstable();
            Some(cross_validate_trainer(dataset, &all, ModelKind::Qsvm, cfg, cfg.cv_folds, cfg.seeds.sampling, |x, y| {
                fit_qsvm_with(spec.clone(), cfg, x, y)
            })?)
        } else {
            None
        };
        Ok((scores, cv))
    };
    let base = FeatureMapRecord {
        map: map_name(spec).to_string(),
        n_qubits: spec.n_qubits,
        status: Status::Ok,
        error: None,
        train_accuracy: None,
        test_accuracy: None,
        generalization_gap: None,
        cv_accuracy: None,
        cv_std: None,
    };
    match run() {
        Ok((s, cv)) => FeatureMapRecord {
            train_accuracy: Some(s.train_accuracy),
            test_accuracy: Some(s.test_accuracy),
            generalization_gap: Some(s.generalization_gap),
            cv_accuracy: cv.as_ref().map(|c| to_percent(c.mean)),
            cv_std: cv.as_ref().map(|c| to_percent(c.std)),
            ..base
        },
        Err(e) => {
            log::warn!("{} feature map failed: {e}", base.map);
            FeatureMapRecord { status: Status::Failed, error: Some(e.to_string()), ..base }
        }
    }
}

fn class_counts(indices: &[usize], labels: &[usize]) -> BTreeMap<usize, usize> {
    let mut counts = BTreeMap::new();
    for &i in indices {
        *counts.entry(labels[i]).or_insert(0) += 1;
    }
    counts
}

/// Runs the experiment on an already loaded dataset. A model that fails is
/// recorded with `status = failed` and the others still run.
pub fn compare_on(dataset: &Dataset, cfg: &ExperimentConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let split = experiment_split(dataset, cfg)?;
    let models = par::map(&ModelKind::ALL, |&k| record(k, cfg, dataset, &split));
    let feature_maps = if cfg.compare_feature_maps {
        par::map(&comparison_maps(cfg), |spec| feature_map_record(spec, cfg, dataset, &split))
    } else {
        Vec::new()
    };
    let labels = dataset.labels(cfg.task);
    Ok(EvalReport {
        schema_version: SCHEMA_VERSION,
        dataset_fingerprint: dataset.fingerprint(),
        dataset_provenance: dataset.provenance.clone(),
        task: cfg.task,
        split: SplitSummary {
            n_train: split.train.len(),
            n_test: split.test.len(),
            train_class_counts: class_counts(&split.train, &labels),
            test_class_counts: class_counts(&split.test, &labels),
        },
        models,
        feature_maps,
        config: serde_json::to_value(cfg)?,
    })
}

/// Loads the configured dataset and runs [`compare_on`].
pub fn compare_models(cfg: &ExperimentConfig) -> Result<EvalReport> {
    let dataset = cfg.dataset.load()?;
    compare_on(&dataset, cfg)
}
