mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qstress::encodings::{amplitude_encode, angle_encode, Entanglement, FeatureMapSpec, MapKind};
use qstress::Error;

use common::*;

#[test]
fn angle_marginals_are_cos_squared() {
    let rows = random_rows(1, 50, 4, -std::f64::consts::PI, std::f64::consts::PI);
    for x in &rows {
        let s = angle_encode(x).unwrap().prepare().unwrap();
        for (q, &xq) in x.iter().enumerate() {
            assert_abs_diff_eq!(s.marginal_zero(q).unwrap(), (xq / 2.0).cos().powi(2), epsilon = 1e-12);
        }
    }
}

#[test]
fn angle_state_is_product_of_single_qubit_states() {
    let x = [0.3, 1.1, -0.7];
    let s = angle_encode(&x).unwrap().prepare().unwrap();
    for b in 0..8usize {
        let want: f64 = (0..3)
            .map(|q| if (b >> q) & 1 == 0 { (x[q] / 2.0).cos() } else { (x[q] / 2.0).sin() })
            .product();
        assert_abs_diff_eq!(s.amplitudes()[b].re, want, epsilon = 1e-14);
        assert_abs_diff_eq!(s.amplitudes()[b].im, 0.0, epsilon = 1e-14);
    }
}

#[test]
fn amplitude_encoding_is_normalized_input() {
    for (i, x) in random_rows(2, 100, 8, -5.0, 5.0).iter().enumerate() {
        let s = amplitude_encode(x).unwrap();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((s.norm() - 1.0).abs() <= 1e-12, "row {i}");
        for (a, v) in s.amplitudes().iter().zip(x) {
            assert_abs_diff_eq!(a.re, v / norm, epsilon = 1e-15);
            assert_eq!(a.im, 0.0);
        }
    }
}

#[test]
fn amplitude_errors() {
    assert!(matches!(amplitude_encode(&[0.0; 4]), Err(Error::Normalization(_))));
    assert!(matches!(amplitude_encode(&[1.0, 2.0, 3.0]), Err(Error::Shape(_))));
}

#[test]
fn zz_on_zero_input_is_uniform() {
    for n in 1..=8 {
        let s = FeatureMapSpec::zz(n).encode(&vec![0.0; n]).unwrap();
        let u = 1.0 / ((1usize << n) as f64).sqrt();
        for a in s.amplitudes() {
            assert_abs_diff_eq!(a.re, u, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-12);
        }
    }
}

#[test]
fn four_qubit_zz_matches_closed_form() {
    for x in random_rows(3, 20, 4, 0.0, std::f64::consts::FRAC_PI_2) {
        for ent in [Entanglement::Full, Entanglement::Linear, Entanglement::DisjointPairs] {
            for reps in 1..=2 {
                let spec = FeatureMapSpec::zz(4).with_entanglement(ent).with_repetitions(reps);
                let got = spec.encode(&x).unwrap();
                let want = zz_state_closed_form(&x, 4, 0.7, reps, &ent.pairs(4));
                assert!(max_abs_diff(got.amplitudes(), want.as_slice()) < 1e-12);
            }
        }
    }
}

#[test]
fn eight_qubit_replicated_zz_matches_closed_form() {
    for x in random_rows(4, 5, 4, 0.0, 1.0) {
        let spec = FeatureMapSpec::zz(8);
        let want = zz_state_closed_form(&x, 8, spec.alpha, 1, &Entanglement::Full.pairs(8));
        assert!(max_abs_diff(spec.encode(&x).unwrap().amplitudes(), want.as_slice()) < 1e-12);
    }
}

#[test]
fn alpha_changes_the_state() {
    let x = [0.4, 0.9, 0.2, 0.6];
    let a = FeatureMapSpec::zz(4).encode(&x).unwrap();
    let b = FeatureMapSpec::zz(4).with_alpha(0.3).encode(&x).unwrap();
    assert!(max_abs_diff(a.amplitudes(), b.amplitudes()) > 1e-3);
    let want = zz_state_closed_form(&x, 4, 0.3, 1, &Entanglement::Full.pairs(4));
    assert!(max_abs_diff(b.amplitudes(), want.as_slice()) < 1e-12);
    assert!(FeatureMapSpec::zz(4).with_alpha(0.0).validate().is_err());
}

#[test]
fn pair_patterns() {
    assert_eq!(Entanglement::Full.pairs(4).len(), 6);
    assert_eq!(Entanglement::Linear.pairs(4), vec![(0, 1), (1, 2), (2, 3)]);
    assert_eq!(Entanglement::DisjointPairs.pairs(4), vec![(0, 1), (2, 3)]);
}

#[test]
fn feature_count_checks() {
    assert!(FeatureMapSpec::zz(8).encode(&[0.1, 0.2, 0.3]).is_err());
    assert!(FeatureMapSpec::angle(4).encode(&[0.1; 3]).is_err());
    assert!(FeatureMapSpec::amplitude(2).encode(&[0.1; 4]).is_ok());
    assert_eq!(FeatureMapSpec::default().kind, MapKind::Zz);
    assert!(FeatureMapSpec::zz(4).encode(&[f64::NAN, 0.0, 0.0, 0.0]).is_err());
}

proptest! {
    #[test]
    fn encodings_are_normalized(x in prop::collection::vec(-3.0f64..3.0, 4)) {
        let zz = FeatureMapSpec::zz(8).encode(&x).unwrap();
        prop_assert!((zz.norm() - 1.0).abs() < 1e-12);
        let ang = FeatureMapSpec::angle(4).encode(&x).unwrap();
        prop_assert!((ang.norm() - 1.0).abs() < 1e-12);
        if x.iter().any(|v| *v != 0.0) {
            let amp = FeatureMapSpec::amplitude(2).encode(&x).unwrap();
            prop_assert!((amp.norm() - 1.0).abs() < 1e-12);
        }
    }
}
