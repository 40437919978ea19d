mod common;

use proptest::prelude::*;
use qstress::classical_nn::{build_mlp, train_mlp, DropoutMasks, MlpModel, TrainConfig};
use qstress::data::{PipelineKind, Preprocessor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

#[test]
fn backprop_matches_finite_differences() {
    let mut checked = 0;
    for seed in 0.. {
        if checked == 50 {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = build_mlp(seed);
        let xs = random_rows(1000 + seed, 5, 4, -1.0, 1.0);
        let ys: Vec<u8> = (0..5).map(|_| rng.random_range(0..2)).collect();
        let l2 = if seed % 2 == 0 { 1e-4 } else { 0.0 };
        let masks: Option<Vec<DropoutMasks>> =
            (seed % 3 == 0).then(|| xs.iter().map(|_| model.sample_masks(&mut rng)).collect());
        let (loss, grad) = model.loss_and_gradient(&xs, &ys, l2, masks.as_deref()).unwrap();
        let params = model.flat_params();
        let f = |p: &[f64]| reference_loss(p, &xs, &ys, l2, masks.as_deref(), model.dropout_rate).0;
        assert!((loss - f(&params)).abs() < 1e-12, "seed {seed}: loss");
        if reference_loss(&params, &xs, &ys, l2, masks.as_deref(), model.dropout_rate).1 < 1e-3 {
            continue;
        }
        checked += 1;
        let h = 1e-5;
        for (i, g) in grad.iter().enumerate() {
            let mut p = params.clone();
            p[i] += h;
            let plus = f(&p);
            p[i] -= 2.0 * h;
            let minus = f(&p);
            let fd = (plus - minus) / (2.0 * h);
            assert!((g - fd).abs() <= 1e-6, "seed {seed} param {i}: {g} vs {fd}");
        }
    }
}

fn cfg() -> TrainConfig {
    TrainConfig { seed: 3, ..TrainConfig::default() }
}

#[test]
fn learns_separable_set() {
    let (raw, y) = separable_set(1, 20);
    let pre = Preprocessor::fit(PipelineKind::Classical, &raw).unwrap();
    let x = pre.transform(&raw).unwrap();
    let (m, _) = train_mlp(build_mlp(7), (&x, &y), (&x, &y), &cfg()).unwrap();
    let correct = x.iter().zip(&y).filter(|(x, l)| m.predict(x).unwrap() == **l).count();
    // Frozen from the first verified run: 20/20.
    assert_eq!(correct, 20);
}

#[test]
fn loss_non_increasing_at_small_lr() {
    let (raw, y) = separable_set(4, 16);
    let x = Preprocessor::fit(PipelineKind::Classical, &raw).unwrap().transform(&raw).unwrap();
    let config = TrainConfig {
        learning_rate: 1e-4,
        dropout_rate: 0.0,
        l2_lambda: 0.0,
        batch_size: 16,
        max_epochs: 50,
        early_stop_patience: 1000,
        lr_patience: 1000,
        ..cfg()
    };
    let (_, h) = train_mlp(build_mlp(2), (&x, &y), (&x, &y), &config).unwrap();
    assert_eq!(h.train_loss.len(), 50);
    for w in h.train_loss.windows(2) {
        assert!(w[1] <= w[0], "{} > {}", w[1], w[0]);
    }
}

#[test]
fn early_stopping_restores_best_weights() {
    let (raw, y) = separable_set(5, 30);
    let x = Preprocessor::fit(PipelineKind::Classical, &raw).unwrap().transform(&raw).unwrap();
    let (tx, ty) = (&x[..20], &y[..20]);
    let (vx, vy) = (&x[20..], &y[20..]);
    let config = TrainConfig { early_stop_patience: 5, lr_patience: 3, learning_rate: 0.05, ..cfg() };
    let (m, h) = train_mlp(build_mlp(1), (tx, ty), (vx, vy), &config).unwrap();
    let best = h.val_loss.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(h.val_loss[h.best_epoch], best);
    assert_eq!(m.data_loss(vx, vy).unwrap(), best);
    if h.stopped_early {
        assert_eq!(h.val_loss.len(), h.best_epoch + 1 + config.early_stop_patience);
    }
    for w in h.learning_rate.windows(2) {
        assert!(w[1] == w[0] || w[1] == w[0] * config.lr_reduce_factor);
    }
}

#[test]
fn training_is_deterministic() {
    let (raw, y) = separable_set(6, 20);
    let x = Preprocessor::fit(PipelineKind::Classical, &raw).unwrap().transform(&raw).unwrap();
    let run = || train_mlp(build_mlp(3), (&x, &y), (&x, &y), &cfg()).unwrap();
    assert_eq!(run(), run());
}

#[test]
fn json_round_trip() {
    let m = build_mlp(8);
    let back: MlpModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(back, m);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_is_probability(seed in 0u64..10_000, x in prop::collection::vec(-100.0f64..100.0, 4)) {
        let p = build_mlp(seed).predict_proba(&x).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }
}
