use kpp_core::front_fit::*;
use kpp_core::grid::GridFunction;
use kpp_core::pde_sim::FrontTrace;
use kpp_core::wave_ode::{minimal_wave, WaveProfile};
use proptest::prelude::*;
use std::sync::OnceLock;

fn wave() -> &'static WaveProfile {
    static U: OnceLock<WaveProfile> = OnceLock::new();
    U.get_or_init(|| minimal_wave(-30.0, 60.0, 1e-3).unwrap())
}

/// `U(x - center - shift)` sampled on a co-moving grid at time `t`.
fn shifted_wave(t: f64, center: f64, shift: f64, origin: f64) -> GridFunction {
    let u = wave();
    GridFunction::from_fn(origin, 0.05, 1600, |xi| u.eval(xi + 2.0 * t - center - shift))
}

#[test]
fn shift_self_test() {
    let (t, center) = (50.0, 97.0);
    let state = shifted_wave(t, center, 2.5, -20.0);
    let fit = wave_distance(&state, t, wave(), center).unwrap();
    assert!((fit.h_star + 2.5).abs() <= 1e-3, "{fit:?}");
    assert!(fit.dist <= 1e-6);
    assert!(!fit.at_boundary);
}

#[test]
fn distance_is_translation_invariant() {
    let (t, center) = (50.0, 97.0);
    let state = shifted_wave(t, center, 1.2, -20.0);
    let mut bumped = state.clone();
    for (i, v) in bumped.values.iter_mut().enumerate() {
        *v = (*v + 0.02 * (0.3 * i as f64).sin()).clamp(0.0, 1.0);
    }
    let a = wave_distance(&bumped, t, wave(), center).unwrap();
    let s = 7.0;
    let mut moved = bumped.clone();
    moved.origin += s;
    let b = wave_distance(&moved, t, wave(), center + s).unwrap();
    assert!((a.dist - b.dist).abs() <= 1e-9 && (a.h_star - b.h_star).abs() <= 1e-9, "{a:?} {b:?}");
    assert!(a.dist > 0.01);
}

#[test]
fn far_shift_reports_boundary() {
    let (t, center) = (50.0, 97.0);
    let state = shifted_wave(t, center, 14.0, -20.0);
    let fit = wave_distance(&state, t, wave(), center).unwrap();
    assert!(fit.at_boundary);
    assert!(wave_distance(&GridFunction::new(0.0, 0.05, Vec::new()), t, wave(), center).is_err());
}

#[test]
fn report_block_lists_the_fit() {
    let tr = FrontTrace::from_fn(0.5, &[1.0, 10.0, 100.0, 1000.0], |t| 2.0 * t - 0.5 * t.ln());
    let fit = fit_log_correction(&tr, 1.0).unwrap();
    let text = fit.least_squares.report_block("k = 0");
    assert!(text.starts_with("k = 0\n"));
    assert!(text.contains("least_squares") && text.contains("coefficient 0.500000"));
}

#[test]
fn log_ln_models_are_separated() {
    // a ln ln t drift is not absorbed by the pure-log model on a short window
    let ts: Vec<f64> = (0..26).map(|j| 1e3 * 1.2f64.powi(j)).collect();
    let tr = FrontTrace::from_fn(0.5, &ts, |t| 2.0 * t - 1.5 * t.ln() + t.ln().ln());
    let fit = fit_critical(&tr, 1e3).unwrap();
    assert!(fit.fit.residual_max < 1e-9);
    assert!(fit.pure_log_residual > 0.2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_fit_exact_on_model_class(r in -2.0f64..2.0, c in -10.0f64..10.0, t_min in 1.0f64..500.0) {
        let ts: Vec<f64> = (0..60).map(|j| 1.2f64.powi(j)).collect();
        let tr = FrontTrace::from_fn(0.5, &ts, |t| 2.0 * t - r * t.ln() + c);
        let fit = fit_log_correction(&tr, t_min).unwrap();
        prop_assert!((fit.least_squares.r_hat - r).abs() < 1e-9);
        prop_assert!(fit.least_squares.residual_max < 1e-10);
        prop_assert!((fit.pairwise.r_hat - r).abs() < 1e-9);
    }

    #[test]
    fn critical_fit_exact_on_model_class(beta in -2.0f64..3.0, c in -5.0f64..5.0) {
        let ts: Vec<f64> = (0..50).map(|j| 200.0 * 1.2f64.powi(j)).collect();
        let tr = FrontTrace::from_fn(0.5, &ts, |t| 2.0 * t - 1.5 * t.ln() + beta * t.ln().ln() + c);
        let fit = fit_critical(&tr, 200.0).unwrap();
        prop_assert!((fit.fit.r_hat - beta).abs() < 1e-8);
        prop_assert!(fit.fit.residual_max < 1e-9);
    }
}
