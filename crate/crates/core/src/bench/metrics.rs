use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of true members of the class.
    pub support: usize,
    /// Set when precision or recall had a zero denominator and was defined as 0.
    pub zero_division: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Fraction in [0, 1].
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
}

/// Metrics over the classes that occur in either vector.
pub fn classification_metrics(predicted: &[usize], actual: &[usize]) -> Result<Metrics> {
    let mut classes: Vec<usize> = predicted.iter().chain(actual).copied().collect();
    classes.sort_unstable();
    classes.dedup();
    classification_metrics_for(predicted, actual, &classes)
}

/// Metrics over an explicit class list (classes absent from both vectors
/// still get a row, with zero-division flags set).
pub fn classification_metrics_for(predicted: &[usize], actual: &[usize], classes: &[usize]) -> Result<Metrics> {
    if predicted.len() != actual.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            predicted.len(),
            actual.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::Shape("metrics of an empty prediction set".into()));
    }
    let n = actual.len() as f64;
    let correct = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();

    let per_class: Vec<ClassMetrics> = classes
        .iter()
        .map(|&c| {
            let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
            for (&p, &a) in predicted.iter().zip(actual) {
                match (p == c, a == c) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fneg += 1,
                    _ => {}
                }
            }
            let ratio = |num: usize, den: usize| if den == 0 { None } else { Some(num as f64 / den as f64) };
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fneg);
            let zero_division = precision.is_none() || recall.is_none();
            let (precision, recall) = (precision.unwrap_or(0.0), recall.unwrap_or(0.0));
            let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            ClassMetrics { class: c, precision, recall, f1, support: tp + fneg, zero_division }
        })
        .collect();

    let k = per_class.len().max(1) as f64;
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k;
    let weighted = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(|m| f(m) * m.support as f64).sum::<f64>() / n;
    Ok(Metrics {
        accuracy: correct as f64 / n,
        macro_precision: mean(|m| m.precision),
        macro_recall: mean(|m| m.recall),
        macro_f1: mean(|m| m.f1),
        weighted_precision: weighted(|m| m.precision),
        weighted_recall: weighted(|m| m.recall),
        weighted_f1: weighted(|m| m.f1),
        per_class,
    })
}

/// Train minus test accuracy, both in percent; may be negative.
pub fn generalization_gap(train_acc: f64, test_acc: f64) -> Result<f64> {
    for (name, v) in [("train", train_acc), ("test", test_acc)] {
        if !(0.0..=100.0).contains(&v) {
            return Err(Error::Validation(format!("{name} accuracy {v} outside [0, 100]")));
        }
    }
    Ok(train_acc - test_acc)
}

/// Fraction to percent with two decimals.
pub fn to_percent(fraction: f64) -> f64 {
    (fraction * 10_000.0).round() / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect() {
        let m = classification_metrics(&[0, 1, 1, 0], &[0, 1, 1, 0]).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert!(m.per_class.iter().all(|c| c.f1 == 1.0));
        assert_eq!(m.macro_f1, 1.0);
    }

    #[test]
    fn constant_prediction_on_balanced_truth() {
        let m = classification_metrics(&[1, 1, 1, 1], &[0, 1, 0, 1]).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.per_class[1].recall, 1.0);
        assert_eq!(m.per_class[0].recall, 0.0);
        assert_eq!(m.per_class[0].precision, 0.0);
        assert!(m.per_class[0].zero_division);
    }

    #[test]
    fn confusion_closed_form() {
        // TP=3, FP=1, FN=2, TN=4 for class 1
        let actual = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
        let predicted = [1, 1, 1, 0, 0, 1, 0, 0, 0, 0];
        let m = classification_metrics(&predicted, &actual).unwrap();
        let c = &m.per_class[1];
        assert_eq!(c.precision, 0.75);
        assert_eq!(c.recall, 0.6);
        assert!((c.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(classification_metrics(&[0], &[0, 1]), Err(Error::Shape(_))));
        assert!(matches!(classification_metrics(&[], &[]), Err(Error::Shape(_))));
    }

    #[test]
    fn gap() {
        assert_eq!(generalization_gap(78.75, 45.0).unwrap(), 33.75);
        assert_eq!(generalization_gap(69.0, 55.0).unwrap(), 14.0);
        assert_eq!(generalization_gap(50.0, 50.0).unwrap(), 0.0);
        assert_eq!(generalization_gap(40.0, 55.0).unwrap(), -15.0);
        assert!(generalization_gap(101.0, 5.0).is_err());
    }

    #[test]
    fn percent_rounding() {
        assert_eq!(to_percent(63.0 / 80.0), 78.75);
        assert_eq!(to_percent(1.0 / 3.0), 33.33);
    }
}
