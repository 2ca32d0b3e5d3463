use std::f64::consts::{PI, TAU};

use fracdiff::stability::{closed_form_lambda, DEFAULT_Q_TAU};
use fracdiff::{boundary_curve, boundary_point, boundary_residual};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn formulas_agree_with_complex_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let theta = rng.random_range(0.0..TAU);
        let q_tau = rng.random_range(0.01..20.0);
        let p = boundary_point(q_tau, theta).unwrap();
        let z = closed_form_lambda(q_tau, theta);
        let scale = 1.0 + z.norm();
        assert!(
            (p.lambda_r - z.re).abs() <= 1e-13 * scale,
            "{q_tau} {theta}"
        );
        assert!(
            (p.lambda_i - z.im).abs() <= 1e-13 * scale,
            "{q_tau} {theta}"
        );
        assert!(boundary_residual(&p) <= 1e-12);
        assert!(p.c > 0.0);
    }
}

proptest! {
    #[test]
    fn reflection_symmetry(theta in 0.0f64..TAU, q_tau in 0.01f64..10.0) {
        let p = boundary_point(q_tau, theta).unwrap();
        let m = boundary_point(q_tau, TAU - theta).unwrap();
        prop_assert!((p.lambda_r - m.lambda_r).abs() <= 1e-12 * (1.0 + p.lambda_r.abs()));
        prop_assert!((p.lambda_i + m.lambda_i).abs() <= 1e-12 * (1.0 + p.lambda_i.abs()));
    }
}

#[test]
fn curves_stay_in_right_half_plane() {
    for q_tau in DEFAULT_Q_TAU.iter().copied().chain([0.01, 5.0, 50.0]) {
        let curve = boundary_curve(q_tau, 720).unwrap();
        assert_eq!(curve.points.len(), 721);
        assert!(curve.min_lambda_r() > 0.0, "q_tau {q_tau}");
    }
}

#[test]
fn small_q_tau_collapses_toward_imaginary_axis() {
    let theta = 1.0;
    let mut last = f64::INFINITY;
    for q_tau in [1.0, 0.1, 0.01, 0.001] {
        let lr = boundary_point(q_tau, theta).unwrap().lambda_r;
        assert!(lr > 0.0 && lr < last);
        last = lr;
    }
    assert!(last < 1e-2);
}

#[test]
fn large_q_tau_shrinks_toward_two() {
    let mut last = f64::INFINITY;
    for q_tau in [0.7, 1.2, 2.5, 5.0, 10.0] {
        let modulus = boundary_curve(q_tau, 720).unwrap().max_modulus();
        assert!(modulus < last);
        last = modulus;
    }
    let p = boundary_point(50.0, PI).unwrap();
    assert!((p.lambda_r - 2.0).abs() < 1e-6);
}

#[test]
fn closed_form_at_pi() {
    let q = 2.5f64;
    let p = boundary_point(q, PI).unwrap();
    let expected = 2.0 * (1.0 + (-q).exp()) / (1.0 - (-q).exp());
    assert!((p.lambda_r - expected).abs() < 1e-13);
    assert!(boundary_residual(&p) <= 1e-12);
}
