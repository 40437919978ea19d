mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use qstress::data::{
    amp_class, l2_normalize, sample_and_split, stratified_folds, stratified_holdout, synth_generate, to_binary,
    Dataset, MinMaxScaler, PipelineKind, Preprocessor, SynthParams, Task,
};
use qstress::Error;
use serde::Deserialize;

#[derive(Deserialize)]
struct SynthFixture {
    n: usize,
    seed: u64,
    class_histogram: [usize; 4],
    fingerprint: String,
}

#[test]
fn generator_histogram_is_frozen() {
    let fx: SynthFixture = serde_json::from_str(include_str!("fixtures/synth_seed7.json")).unwrap();
    let d = synth_generate(fx.n, fx.seed, &SynthParams::default()).unwrap();
    let mut hist = [0usize; 4];
    for e in &d.events {
        hist[e.amp_class as usize] += 1;
    }
    assert_eq!(hist, fx.class_histogram);
    assert_eq!(d.fingerprint(), fx.fingerprint);
}

#[test]
fn generated_events_are_valid() {
    let d = synth_generate(2000, 3, &SynthParams::default()).unwrap();
    let mut prev_t = f64::NEG_INFINITY;
    for e in &d.events {
        e.validate().unwrap();
        assert!(e.scr_amplitude >= 0.1);
        assert!(e.elapsed_time >= 0.0);
        assert_eq!(e.amp_class, amp_class(e.scr_amplitude).unwrap());
        assert!((1..=40).contains(&e.detected_scr_number));
        if e.detected_scr_number > 1 {
            assert!(e.elapsed_time >= prev_t);
        }
        prev_t = e.elapsed_time;
    }
}

#[test]
fn class_boundaries_belong_to_upper_class() {
    assert_eq!(amp_class(0.1).unwrap(), 0);
    assert_eq!(amp_class(0.3999).unwrap(), 0);
    assert_eq!(amp_class(0.4).unwrap(), 1);
    assert_eq!(amp_class(0.7).unwrap(), 2);
    assert_eq!(amp_class(1.0).unwrap(), 3);
    assert_eq!(amp_class(7.5).unwrap(), 3);
    assert!(matches!(amp_class(0.0999), Err(Error::BelowDetection(_))));
    assert_eq!((0..4).map(|c| to_binary(c).unwrap()).collect::<Vec<_>>(), vec![0, 0, 1, 1]);
    assert!(to_binary(4).is_err());
}

#[test]
fn csv_round_trip_is_byte_exact() {
    let d = synth_generate(300, 11, &SynthParams::default()).unwrap();
    let bytes = d.to_csv_bytes();
    let back = Dataset::read_csv(bytes.as_slice()).unwrap();
    assert_eq!(back.events, d.events);
    assert_eq!(back.to_csv_bytes(), bytes);
    assert_eq!(back.fingerprint(), d.fingerprint());
}

#[test]
fn fixture_csv_loads() {
    let d = Dataset::read_csv(include_str!("fixtures/events_small.csv").as_bytes()).unwrap();
    assert_eq!(d.len(), 6);
    assert_eq!(d.labels(Task::Multiclass4), vec![1, 0, 0, 2, 3, 1]);
    assert_eq!(d.labels(Task::Binary), vec![0, 0, 0, 1, 1, 0]);
}

#[test]
fn column_order_and_optional_class() {
    let text = "scr,detected_scr_number,elapsed_time,scr_amplitude\n2.0,1,3.5,0.5\n";
    let d = Dataset::read_csv(text.as_bytes()).unwrap();
    assert_eq!(d.events[0].elapsed_time, 3.5);
    assert_eq!(d.events[0].amp_class, 1);
}

#[test]
fn csv_errors() {
    let missing = "elapsed_time,scr,detected_scr_number\n1,2,3\n";
    assert!(matches!(Dataset::read_csv(missing.as_bytes()), Err(Error::Schema(c)) if c == "scr_amplitude"));
    let bad = "elapsed_time,scr_amplitude,scr,detected_scr_number\n1,0.5,2,1\n1,abc,2,2\n";
    assert!(matches!(Dataset::read_csv(bad.as_bytes()), Err(Error::Parse { row: 2, .. })));
    let wrong_class = "elapsed_time,scr_amplitude,scr,detected_scr_number,amp_class\n1,0.5,2,1,3\n1,0.5,2,2,1\n";
    assert!(matches!(Dataset::read_csv(wrong_class.as_bytes()), Err(Error::ClassMismatch(rows)) if rows == vec![1]));
    let below = "elapsed_time,scr_amplitude,scr,detected_scr_number\n1,0.05,2,1\n";
    assert!(matches!(Dataset::read_csv(below.as_bytes()), Err(Error::BelowDetection(_))));
}

#[test]
fn scaler_is_fit_on_train_only() {
    let train = vec![vec![0.0, 10.0], vec![2.0, 20.0]];
    let s = MinMaxScaler::fit(&train, (0.0, 1.0)).unwrap();
    assert_eq!(s.transform_row(&[1.0, 15.0]).unwrap(), vec![0.5, 0.5]);
    assert_eq!(s.transform_row(&[4.0, 0.0]).unwrap(), vec![2.0, -1.0]);
}

#[test]
fn quantum_pipeline_scales_then_normalizes() {
    let train = vec![vec![0.0, 0.0, 0.0, 0.0], vec![1.0, 2.0, 3.0, 4.0], vec![0.5, 1.0, 0.0, 4.0]];
    let p = Preprocessor::fit(PipelineKind::Quantum, &train).unwrap();
    let out = p.transform(&train).unwrap();
    assert_eq!(out[0], vec![0.0; 4]);
    let h = std::f64::consts::FRAC_PI_2;
    let want = l2_normalize(&[0.5 * h, 0.5 * h, 0.0, h]).unwrap();
    for (a, b) in out[2].iter().zip(&want) {
        assert!((a - b).abs() < 1e-15);
    }
    assert!((out[1].iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn default_split_sizes() {
    let d = synth_generate(1000, 7, &SynthParams::default()).unwrap();
    let labels = d.labels(Task::Binary);
    let s = sample_and_split(&labels, 100, 0.8, 42).unwrap();
    assert_eq!((s.train.len(), s.test.len()), (80, 20));
    assert_eq!(s, sample_and_split(&labels, 100, 0.8, 42).unwrap());
    assert_ne!(s, sample_and_split(&labels, 100, 0.8, 43).unwrap());
}

#[test]
fn stratification_errors() {
    let labels = vec![0, 0, 0, 0, 1];
    assert!(matches!(sample_and_split(&labels, 5, 0.8, 0), Err(Error::Stratification { .. })));
    assert!(matches!(sample_and_split(&labels, 6, 0.8, 0), Err(Error::Shape(_))));
    assert!(stratified_folds(&[0, 1, 2, 3, 4], &labels, 1, 0).is_err());
}

fn counts(idx: &[usize], labels: &[usize]) -> Vec<usize> {
    let mut c = vec![0; 4];
    for &i in idx {
        c[labels[i]] += 1;
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_is_stratified_partition(
        labels in prop::collection::vec(0usize..3, 30..200),
        frac in 0.5f64..0.9,
        seed in 0u64..1000,
    ) {
        let n_sample = labels.len() * 3 / 4;
        match sample_and_split(&labels, n_sample, frac, seed) {
            Ok(s) => {
                let train: BTreeSet<usize> = s.train.iter().copied().collect();
                let test: BTreeSet<usize> = s.test.iter().copied().collect();
                prop_assert!(train.is_disjoint(&test));
                prop_assert_eq!(train.len() + test.len(), n_sample);
                let (ct, cs) = (counts(&s.train, &labels), counts(&s.test, &labels));
                for c in 0..3 {
                    let total = ct[c] + cs[c];
                    if total == 0 { continue; }
                    prop_assert!(ct[c] >= 1 && cs[c] >= 1);
                    let want = total as f64 * (1.0 - frac);
                    prop_assert!((cs[c] as f64 - want).abs() <= 2.0, "class {} test {} want {}", c, cs[c], want);
                }
            }
            Err(e) => prop_assert!(matches!(e, Error::Stratification { .. }), "unexpected error"),
        }
    }

    #[test]
    fn folds_partition_and_balance(labels in prop::collection::vec(0usize..2, 20..120), k in 2usize..6, seed in 0u64..100) {
        let idx: Vec<usize> = (0..labels.len()).collect();
        match stratified_folds(&idx, &labels, k, seed) {
            Ok(folds) => {
                let all: Vec<usize> = folds.iter().flatten().copied().collect();
                prop_assert_eq!(all.len(), idx.len());
                prop_assert_eq!(all.iter().copied().collect::<BTreeSet<_>>().len(), idx.len());
                let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
                prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
                for f in &folds {
                    let c = counts(f, &labels);
                    prop_assert!(c[0] >= 1 && c[1] >= 1);
                }
            }
            Err(e) => prop_assert!(matches!(e, Error::Stratification { .. }), "unexpected error"),
        }
    }

    #[test]
    fn holdout_stays_inside_subset(seed in 0u64..500) {
        let labels: Vec<usize> = (0..60).map(|i| i % 2).collect();
        let subset: Vec<usize> = (10..50).collect();
        let s = stratified_holdout(&subset, &labels, 0.2, seed).unwrap();
        prop_assert_eq!(s.test.len(), 8);
        prop_assert!(s.train.iter().chain(&s.test).all(|i| subset.contains(i)));
    }
}
