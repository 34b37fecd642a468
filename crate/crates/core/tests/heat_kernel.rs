use kpp_core::heat_kernel::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use libm::{erf, erfc};

const TOL: f64 = 1e-11;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn anchor_ratio(t: f64) -> f64 {
    v_dirichlet(t, 2.0 * t.sqrt(), 1e-10).unwrap().value * 2.0 * t / t.ln()
}

/// Data `1` on the half line gives `erf(x / 2√t)`; data `1` on `(0, 1]`
/// gives a combination of three error functions.
#[test]
fn dirichlet_matches_error_function_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let t: f64 = 10f64.powf(rng.random_range(-1.0..4.0));
        let x: f64 = rng.random_range(0.01..5.0) * t.sqrt();
        let s = 2.0 * t.sqrt();
        let half_line = v_dirichlet_with(t, x, |_| 1.0, &[], TOL).unwrap().value;
        assert!(rel(half_line, erf(x / s)) < 1e-10, "t = {t}, x = {x}");
        let boxed = v_dirichlet_with(t, x, |y| if y <= 1.0 { 1.0 } else { 0.0 }, &[1.0], TOL).unwrap().value;
        let exact = 0.5 * (2.0 * erf(x / s) - erf((x - 1.0) / s) - erf((x + 1.0) / s));
        assert!((boxed - exact).abs() <= 1e-10 * exact.abs() + 1e-15, "t = {t}, x = {x}: {boxed} vs {exact}");
    }
}

#[test]
fn image_kernel_equals_sinh_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let t: f64 = 10f64.powf(rng.random_range(0.0..3.0));
        let x: f64 = rng.random_range(0.05..3.0) * t.sqrt();
        let a = v_dirichlet(t, x, 1e-12).unwrap().value;
        let b = v_dirichlet_sinh_form(t, x, 1e-12).unwrap().value;
        assert!(rel(a, b) < 1e-10, "t = {t}, x = {x}: {a} vs {b}");
    }
}

#[test]
fn semigroup_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..5 {
        let t1: f64 = rng.random_range(0.5..5.0);
        let t2: f64 = rng.random_range(0.5..5.0);
        let x: f64 = rng.random_range(0.1..10.0);
        let direct = v_dirichlet(t1 + t2, x, 1e-12).unwrap().value;
        let restarted = v_dirichlet_with(t2, x, |y| v_dirichlet(t1, y, 1e-12).unwrap().value, &[], 1e-10).unwrap().value;
        assert!(rel(restarted, direct) < 1e-6, "({t1}, {t2}, {x}): {restarted} vs {direct}");
    }
}

fn centered_dx(t: f64, x: f64) -> f64 {
    let h = 1e-2 * x.min(t.sqrt());
    let d = |h: f64| (v_dirichlet(t, x + h, 1e-13).unwrap().value - v_dirichlet(t, x - h, 1e-13).unwrap().value) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

#[test]
fn derivative_matches_centered_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut points: Vec<(f64, f64)> = (0..20)
        .map(|_| {
            let t: f64 = 10f64.powf(rng.random_range(0.0..6.0));
            (t, rng.random_range(0.1..4.0) * t.sqrt())
        })
        .collect();
    points.push((1e4, 50.0));
    for (t, x) in points {
        let dv = v_dirichlet_dx(t, x, 1e-12).unwrap().value;
        let fd = centered_dx(t, x);
        assert!(rel(dv, fd) < 1e-4, "t = {t}, x = {x}: {dv} vs {fd}");
    }
}

#[test]
fn slope_is_positive_at_the_boundary() {
    for t in [1.0, 1e2, 1e4, 1e6, 1e8] {
        for x in [0.0, 1e-6, 1e-3] {
            assert!(v_dirichlet_dx(t, x, 1e-10).unwrap().value > 0.0, "t = {t}, x = {x}");
        }
    }
}

#[test]
fn anchor_asymptotic_at_large_time() {
    let limit = (-1.0f64).exp() / std::f64::consts::PI.sqrt();
    assert!((limit - 0.2075537487).abs() < 1e-9);
    let r8 = anchor_ratio(1e8);
    let r4 = anchor_ratio(1e4);
    assert!(rel(r8, limit) < 0.15, "ratio {r8}");
    assert!((r8 - limit).abs() < (r4 - limit).abs());
}

#[test]
fn anchor_ratio_decreases_monotonically_to_its_limit() {
    let limit = (-1.0f64).exp() / std::f64::consts::PI.sqrt();
    let ratios: Vec<f64> = (0..=16).map(|j| anchor_ratio(10f64.powf(4.0 + 0.25 * j as f64))).collect();
    for w in ratios.windows(2) {
        assert!(w[1] < w[0] && w[1] > limit, "{ratios:?}");
    }
}

#[test]
fn postponed_band_holds_and_narrows() {
    let rep = verify_postponed_bounds(&[1e3, 1e5, 1e7], 20, 1e-10).unwrap();
    assert!(rep.passed(), "{}", rep.text_block());
    let bands: Vec<(f64, f64)> = [1e3, 1e5, 1e7]
        .iter()
        .map(|&t| {
            let b = postponed_band(t, 20, 1e-10).unwrap();
            (b.0, b.2)
        })
        .collect();
    for w in bands.windows(2) {
        assert!(w[1].1 - w[1].0 < w[0].1 - w[0].0);
        assert!(w[1].0 > POSTPONED_LIMIT && w[1].1 < w[0].1);
    }
    // The band drifts toward its limit rather than nesting: at t = 10^7 it
    // lies entirely below the t = 10^3 band.
    assert!(bands[2].1 < bands[0].0);
}

#[test]
fn postponed_band_at_interval_ends() {
    let t: f64 = 1e5;
    for x in [1.0 + 1e-9, 2.0, t.ln() - 1e-9] {
        let ratio = v_dirichlet(t, x, 1e-10).unwrap().value * t.powf(1.5) / (x * t.ln());
        assert!((0.05..=5.0).contains(&ratio), "x = {x}: {ratio}");
    }
    assert!(verify_postponed_bounds(&[50.0], 5, 1e-10).is_err());
}

#[test]
fn gradient_bound_holds_with_one_constant() {
    let ts: Vec<f64> = (0..=12).map(|j| 10f64.powf(2.0 + 0.5 * j as f64)).collect();
    let g = verify_gradient_bound(&ts, 120, 1e-10).unwrap();
    assert!(g.report.passed(), "{}", g.report.text_block());
    assert!(g.c_hat.is_finite() && g.c_hat > 0.0);
    for w in g.per_t.windows(2) {
        assert!(w[1].1 < w[0].1, "{:?}", g.per_t);
    }
}

fn lemma52_samples() -> (Vec<f64>, Vec<f64>) {
    let ts = (0..=12).map(|j| 10f64.powf(2.0 + 0.5 * j as f64)).collect();
    let xs = (1..=80).map(|j| 0.25 * j as f64).collect();
    (ts, xs)
}

#[test]
fn weighted_sup_stabilizes_below_the_critical_exponent() {
    let (ts, xs) = lemma52_samples();
    let rep = verify_lemma52(0.1, &ts, &xs, 1e-10).unwrap();
    assert!(rep.passed(), "{}", rep.text_block());
    let sharp = verify_lemma52(0.0, &ts, &xs, 1e-10).unwrap();
    assert!(!sharp.passed());
    assert!(sharp.worst_signed_residual > 0.1);
}

/// Past `10 + 4√(t ln t)` the kernel mass against `v0 <= 1/y²` is below 1e-15.
#[test]
fn truncation_tail_is_negligible() {
    for e in 2..=8 {
        let t = 10f64.powi(e);
        let r = 10.0 + 4.0 * (t * t.ln()).sqrt();
        let tail = 0.5 * erfc(r / (2.0 * t.sqrt())) / (r * r);
        assert!(tail < 1e-15, "t = {t}: {tail}");
        assert!(truncation_radius(t, 1e-10) >= 10.0 + 4.0 * (t * 1e10f64.ln()).sqrt() - 1e-9);
    }
}

#[test]
fn unit_data_gives_pure_growth() {
    for &(t, x) in &[(0.5, 1.0), (10.0, -3.0), (1e3, 2e3), (1e6, 0.0)] {
        let sv = v_wholeline_scaled(t, x, &UnitData, 1e-12).unwrap();
        assert!((sv.ln_value() - t).abs() < 1e-9 * t.max(1.0));
    }
    let v = v_wholeline_kpp(1.0, 0.0, 1.0, 1.0, 1e-12).unwrap().value;
    assert!(v < 1f64.exp());
}

/// Step data `1_{y <= 0}`: `v = e^t erfc(x / 2√t) / 2`.
struct Step;

impl LineData for Step {
    fn shifted_log(&self, y: f64) -> f64 {
        if y <= 0.0 {
            y
        } else {
            f64::NEG_INFINITY
        }
    }

    fn kinks(&self) -> Vec<f64> {
        vec![0.0]
    }
}

#[test]
fn step_data_matches_complementary_error_function() {
    for &(t, x) in &[(1.0, 0.5), (20.0, 10.0), (100.0, -5.0)] {
        let got = v_wholeline_scaled(t, x, &Step, 1e-12).unwrap().value();
        let exact = t.exp() * 0.5 * erfc(x / (2.0 * t.sqrt()));
        assert!(rel(got, exact) < 1e-10, "({t}, {x}): {got} vs {exact}");
    }
    // At x = 2t the value sits at e^{t - t} scale; compare logarithms with the
    // large-argument expansion of erfc.
    let t: f64 = 1e4;
    let z = t.sqrt();
    let ln_exact = t - z * z - (2.0 * z * std::f64::consts::PI.sqrt()).ln()
        + (1.0 - 0.5 / (z * z) + 0.75 / z.powi(4) - 1.875 / z.powi(6)).ln();
    let got = v_wholeline_scaled(t, 2.0 * t, &Step, 1e-12).unwrap().ln_value();
    assert!((got - ln_exact).abs() < 1e-9, "{got} vs {ln_exact}");
}

#[test]
fn limit_constant_matches_closed_forms() {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    for c in [0.0, 1.0, 2.5] {
        let k0 = 0.5 * erfc(-0.5 * c);
        assert!(rel(wholeline_limit_constant(0.0, 1.0, c).unwrap(), k0) < 1e-12);
        let k1 = ((-0.25 * c * c).exp() + c * sqrt_pi * 0.5 * erfc(-0.5 * c)) / sqrt_pi;
        assert!(rel(wholeline_limit_constant(1.0, 2.0, c).unwrap(), 2.0 * k1) < 1e-12);
    }
}

fn front_ratio(t: f64, k: f64, c: f64) -> f64 {
    let sv = v_wholeline_kpp_scaled(t, 2.0 * t + c * t.sqrt(), k, 1.0, 1e-10).unwrap();
    (sv.ln_value() - 0.5 * k * t.ln() + c * t.sqrt()).exp()
}

#[test]
fn front_data_ratio_near_limit_constant() {
    let lc = wholeline_limit_constant(2.0, 1.0, 1.0).unwrap();
    assert!(rel(front_ratio(400.0, 2.0, 1.0), lc) < 0.2);
    for k in [0.0, 2.0] {
        let lc = wholeline_limit_constant(k, 1.0, 1.0).unwrap();
        for e in [2.0, 3.0, 4.0, 5.0, 6.0] {
            let r = front_ratio(10f64.powf(e), k, 1.0);
            assert!(r > 0.0 && r <= 2.0 * lc, "k = {k}, t = 1e{e}: {r}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dirichlet_values_lie_in_unit_interval(lt in -1.0f64..8.0, s in 0.0f64..6.0) {
        let t = 10f64.powf(lt);
        let v = v_dirichlet(t, s * t.sqrt(), 1e-10).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn dirichlet_values_decrease_in_time_at_fixed_x(x in 0.1f64..50.0, lt in 1.0f64..6.0) {
        let t = 10f64.powf(lt);
        let a = v_dirichlet(t, x, 1e-11).unwrap().value;
        let b = v_dirichlet(2.0 * t.max(x * x), x, 1e-11).unwrap().value;
        prop_assert!(b < a);
    }
}
