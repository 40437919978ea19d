use serde::{Deserialize, Serialize};

use super::models::{fit, ModelKind, TrainedModel};
use crate::config::ExperimentConfig;
use crate::data::{stratified_folds, Dataset};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    /// Validation accuracy of each fold, as a fraction.
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
    /// Validation indices of each fold.
    pub folds: Vec<Vec<usize>>,
}

/// Stratified k-fold over `indices`. `fit_predict(train, validation)` must
/// return one predicted label per validation index.
pub fn cross_validate_with<F>(indices: &[usize], labels: &[usize], k: usize, seed: u64, mut fit_predict: F) -> Result<CvResult>
where
    F: FnMut(&[usize], &[usize]) -> Result<Vec<usize>>,
{
    let folds = stratified_folds(indices, labels, k, seed)?;
    let mut fold_accuracies = Vec::with_capacity(k);
    for (f, val) in folds.iter().enumerate() {
        let train: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let pred = fit_predict(&train, val)?;
        if pred.len() != val.len() {
            return Err(Error::Shape(format!("fold {f}: {} predictions for {} rows", pred.len(), val.len())));
        }
        let correct = pred.iter().zip(val).filter(|(p, &i)| **p == labels[i]).count();
        fold_accuracies.push(correct as f64 / val.len() as f64);
    }
    let mean = fold_accuracies.iter().sum::<f64>() / k as f64;
    let std = (fold_accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / k as f64).sqrt();
    Ok(CvResult { fold_accuracies, mean, std, folds })
}

/// k-fold for a model kind over the given dataset rows.
pub fn cross_validate(
    dataset: &Dataset,
    indices: &[usize],
    kind: ModelKind,
    cfg: &ExperimentConfig,
    k: usize,
    seed: u64,
) -> Result<CvResult> {
    cross_validate_trainer(dataset, indices, kind, cfg, k, seed, |raw, y| fit(kind, cfg, raw, y))
}

pub(crate) fn cross_validate_trainer<T>(
    dataset: &Dataset,
    indices: &[usize],
    kind: ModelKind,
    cfg: &ExperimentConfig,
    k: usize,
    seed: u64,
    mut trainer: T,
) -> Result<CvResult>
where
    T: FnMut(&[Vec<f64>], &[usize]) -> Result<TrainedModel>,
{
    let labels = dataset.labels(kind.effective_task(cfg.task));
    let features = dataset.features();
    let rows = |ids: &[usize]| ids.iter().map(|&i| features[i].clone()).collect::<Vec<_>>();
    cross_validate_with(indices, &labels, k, seed, |train, val| {
        let y: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
        trainer(&rows(train), &y)?.predict(&rows(val))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_model_on_balanced_data() {
        let labels: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let idx: Vec<usize> = (0..100).collect();
        let r = cross_validate_with(&idx, &labels, 5, 3, |_, val| Ok(vec![1; val.len()])).unwrap();
        assert!(r.fold_accuracies.iter().all(|&a| a == 0.5));
        assert_eq!(r.mean, 0.5);
        assert_eq!(r.std, 0.0);
    }

    #[test]
    fn folds_partition_and_repeat() {
        let labels: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let idx: Vec<usize> = (0..100).collect();
        let r = cross_validate_with(&idx, &labels, 5, 9, |t, v| {
            assert_eq!(t.len() + v.len(), 100);
            assert!(v.iter().all(|i| !t.contains(i)));
            Ok(vec![0; v.len()])
        })
        .unwrap();
        assert!(r.folds.iter().all(|f| f.len() == 20));
        let again = cross_validate_with(&idx, &labels, 5, 9, |_, v| Ok(vec![0; v.len()])).unwrap();
        assert_eq!(r.folds, again.folds);
    }

    #[test]
    fn small_class_rejected() {
        let mut labels = vec![0usize; 20];
        labels[0] = 1;
        let idx: Vec<usize> = (0..20).collect();
        assert!(matches!(
            cross_validate_with(&idx, &labels, 5, 0, |_, v| Ok(vec![0; v.len()])),
            Err(Error::Stratification { .. })
        ));
    }
}
