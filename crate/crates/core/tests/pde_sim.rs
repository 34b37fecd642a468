use kpp_core::grid::GridFunction;
use kpp_core::pde_sim::*;
use kpp_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn half_trace(out: &SimOutput) -> &FrontTrace {
    out.trace(0.5).expect("level 1/2 traced")
}

#[test]
fn initial_data_examples() {
    let c = SimConfig::new(-2.0, 100.0);
    let u0 = init_front_data(&c).unwrap();
    let i = ((10.0 - c.xi_min) / c.dxi).round() as usize;
    assert!((u0.node(i) - 10.0).abs() < 1e-12);
    let exact = (-10.0f64).exp() / 100.0;
    assert!((u0.values[i] - exact).abs() <= 1e-14 * exact);
    assert_eq!(u0.values[0], 1.0);
    assert_eq!(*u0.values.last().unwrap(), 0.0);
}

#[test]
fn initial_data_is_continuous_and_bracketed() {
    for k in [-2.0, -1.0, 0.0, 1.0, 3.0] {
        for a in [0.5, 1.0, 4.0] {
            let mut c = SimConfig::new(k, 100.0);
            c.amplitude = a;
            let u0 = init_front_data(&c).unwrap();
            let n = u0.len();
            for (i, &u) in u0.values[..n - 1].iter().enumerate() {
                let xi = u0.node(i);
                assert!(u > 0.0 || xi > 600.0, "k = {k}: u0({xi}) = {u}");
                assert!(u <= 1.0);
                if xi >= 1.0 && u < 1.0 && u > 0.0 {
                    let tail = xi.powf(k) * (-xi).exp();
                    let ratio = u / tail;
                    assert!(ratio >= a * (1.0 - 1e-12) && ratio <= a * (1.0 + 1e-12), "k = {k}, xi = {xi}");
                }
            }
            // no jumps: ln u0 is Lipschitz with constant |k| + |ln A| + 2
            let lip = k.abs() + a.ln().abs() + 2.0;
            let jump = u0.values.windows(2).take(n - 2).filter(|w| w[1] > 0.0).map(|w| (w[1] / w[0]).ln().abs()).fold(0.0, f64::max);
            assert!(jump <= lip * c.dxi, "k = {k}, A = {a}: jump {jump}");
        }
    }
    assert!(matches!(init_front_data(&SimConfig::new(-3.0, 100.0)), Err(Error::Config(_))));
}

#[test]
fn constant_state_follows_the_logistic_flow() {
    let dt = 0.01;
    let u = 1e-6;
    let mut state = GridFunction::from_fn(-200.0, 0.05, 8001, |_| u);
    state.values[0] = 1.0;
    *state.values.last_mut().unwrap() = 0.0;
    let next = step(&state, 0.0, dt).unwrap();
    let g = dt.exp();
    let exact = u * g / (1.0 + u * (g - 1.0));
    let mid = next.values[4000];
    assert!((mid - exact).abs() <= 1e-12 * exact, "{mid} vs {exact}");
}

#[test]
fn level_extraction_is_exact_for_exponentials() {
    let g = GridFunction::from_fn(0.0, 0.05, 401, |xi| (-xi).exp());
    let m = (-3.0f64).exp();
    let x = extract_level(&g, 7.0, m).unwrap();
    assert!((x - (3.0 + 14.0)).abs() < 1e-12);
    let right = GridFunction::from_fn(1.0, 0.05, 100, |xi| (-xi).exp());
    assert!(matches!(extract_level(&right, 0.0, 0.5), Err(Error::LevelNotAttained { .. })));
    assert!(extract_level(&g, 0.0, 1.5).is_err());
}

#[test]
fn discrete_residual_vanishes_on_steps() {
    let c = SimConfig::new(0.0, 10.0);
    let mut state = init_front_data(&c).unwrap();
    for n in 0..20 {
        let next = step(&state, n as f64 * c.dt, c.dt).unwrap();
        let res = discrete_residual(&state, &next, n as f64 * c.dt, c.dt).unwrap();
        let worst = res.values.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        assert!(worst < 1e-9, "step {n}: {worst}");
        state = next;
    }
    let other = GridFunction::from_fn(0.0, 0.1, 10, |x| x);
    assert!(matches!(discrete_residual(&state, &other, 0.0, c.dt), Err(Error::GridMismatch(_))));
}

#[test]
fn discrete_residual_finite_for_random_smooth_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let (a, b, s): (f64, f64, f64) = (rng.random_range(0.1..2.0), rng.random_range(-5.0..5.0), rng.random_range(0.5..3.0));
        let prev = GridFunction::from_fn(-10.0, 0.05, 401, |x| 0.5 * (1.0 - (a * (x - b)).tanh()));
        let next = GridFunction::from_fn(-10.0, 0.05, 401, |x| 0.5 * (1.0 - (a * (x - b - s)).tanh()));
        let res = discrete_residual(&prev, &next, 0.0, 0.01).unwrap();
        assert!(res.values.iter().all(|r| r.is_finite()));
    }
}

#[test]
fn step_rejects_bad_inputs() {
    let g = GridFunction::from_fn(0.0, 0.05, 100, |_| 0.5);
    assert!(matches!(step(&g, 0.0, 0.2), Err(Error::Config(_))));
    let mut bad = g.clone();
    for v in &mut bad.values[20..80] {
        *v = 1.5;
    }
    assert!(matches!(step(&bad, 0.0, 0.01), Err(Error::Instability { .. })));
}

/// 50 random ordered pairs, each advanced 1e3 steps, stay ordered.
#[test]
fn comparison_principle_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (n, dxi, dt) = (400, 0.05, 0.01);
    let stepper = ImexStepper::new(n, dxi, dt).unwrap();
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for i in 1..n - 1 {
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            lo[i] = a.min(b);
            hi[i] = a.max(b);
        }
        for s in 1..=1000 {
            stepper.advance(&mut lo, s as f64 * dt).unwrap();
            stepper.advance(&mut hi, s as f64 * dt).unwrap();
        }
        worst = worst.min(hi.iter().zip(&lo).map(|(h, l)| h - l).fold(f64::INFINITY, f64::min));
    }
    assert!(worst >= -1e-12, "{worst}");
}

#[test]
fn translation_covariance() {
    let mut c = SimConfig::new(0.0, 100.0);
    c.levels = vec![0.1, 0.5, 0.9];
    let base = init_front_data(&c).unwrap();
    let mut shifted = base.clone();
    let n = shifted.len();
    for i in (10..n - 1).rev() {
        shifted.values[i] = base.values[i - 10];
    }
    for v in &mut shifted.values[..10] {
        *v = 1.0;
    }
    let a = simulate_from(&c, base).unwrap();
    let b = simulate_from(&c, shifted).unwrap();
    for (ta, tb) in a.traces.iter().zip(&b.traces) {
        for (&(t, xa), &(_, xb)) in ta.samples.iter().zip(&tb.samples) {
            assert!((xb - xa - 10.0 * c.dxi).abs() <= 1e-9, "m = {}, t = {t}: {}", ta.level, xb - xa);
        }
    }
}

#[test]
fn refinement_moves_the_front_little() {
    let c = SimConfig::new(0.0, 100.0);
    let fine = c.clone().with_resolution(0.025, 0.005);
    let x = half_trace(&simulate(&c).unwrap()).position_at(100.0).unwrap();
    let xf = half_trace(&simulate(&fine).unwrap()).position_at(100.0).unwrap();
    assert!((x - xf).abs() <= 0.01, "{x} vs {xf}");
}

#[test]
fn k_one_delay_stays_bounded() {
    let c = SimConfig::new(1.0, 1000.0);
    let out = simulate(&c).unwrap();
    let d: Vec<f64> = half_trace(&out).window(100.0, 1000.0).iter().map(|&(t, x)| 2.0 * t - x).collect();
    let spread = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - d.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread <= 1.0, "{spread}");
    assert!(out.diagnostics.monitor_alarm_at.is_none());
}

#[test]
fn runs_are_deterministic_and_levels_ordered() {
    let mut c = SimConfig::new(-1.0, 50.0);
    c.snapshot_times = vec![10.0, 50.0];
    let a = simulate(&c).unwrap();
    let b = simulate(&c).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.snapshots.len(), 2);
    assert_eq!(a.snapshot(50.0).unwrap().state, a.final_state);
    let (t1, t5, t9) = (a.trace(0.1).unwrap(), a.trace(0.5).unwrap(), a.trace(0.9).unwrap());
    for ((p1, p5), p9) in t1.samples.iter().zip(&t5.samples).zip(&t9.samples) {
        assert!(p9.1 < p5.1 && p5.1 < p1.1, "t = {}", p1.0);
    }
    let times: Vec<f64> = t5.samples.iter().map(|s| s.0).collect();
    assert_eq!(times[0], 1.0);
    assert_eq!(*times.last().unwrap(), 50.0);
}

#[test]
fn weighted_stepping_matches_plain_stepping() {
    let c = SimConfig::new(-1.0, 10.0);
    let u0 = init_front_data(&c).unwrap();
    let plain = ImexStepper::for_grid(&u0, c.dt).unwrap();
    let weighted = WeightedStepper::for_grid(&u0, c.dt).unwrap();
    let mut u = u0.values.clone();
    let mut v = weighted.weight(&u0);
    for n in 1..=300 {
        plain.advance(&mut u, n as f64 * c.dt).unwrap();
        weighted.advance(&mut v, n as f64 * c.dt).unwrap();
    }
    let back = weighted.unweight(&v, u0.origin, u0.spacing);
    for (i, (&a, &b)) in u.iter().zip(&back.values).enumerate() {
        if a > 1e-250 {
            assert!((a - b).abs() <= 1e-11 * a, "node {i}: {a} vs {b}");
        }
    }
}

#[test]
fn weighted_initial_tail_survives_underflow() {
    let c = SimConfig::new(-2.0, 1e5);
    let v0 = init_front_weighted(&c).unwrap();
    let u0 = init_front_data(&c).unwrap();
    let i = ((900.0 - c.xi_min) / c.dxi).round() as usize;
    assert_eq!(u0.values[i], 0.0);
    assert!((v0[i] - 900f64.powi(-2)).abs() <= 1e-14 * v0[i]);
    let j = ((10.0 - c.xi_min) / c.dxi).round() as usize;
    assert!((v0[j] * (-10.0f64).exp() - u0.values[j]).abs() <= 1e-14 * u0.values[j]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn step_keeps_values_in_unit_interval(seed in 0u64..1000, dt in 0.001f64..0.1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = GridFunction::new(-5.0, 0.05, (0..200).map(|_| rng.random::<f64>()).collect());
        g.values[0] = 1.0;
        g.values[199] = 0.0;
        let next = step(&g, 0.0, dt).unwrap();
        prop_assert!(next.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn exponential_levels_are_exact(rate in 0.2f64..3.0, level in -8.0f64..-0.1, t in 0.0f64..100.0) {
        let g = GridFunction::from_fn(0.0, 0.05, 2001, |xi| (-rate * xi).exp());
        let x = extract_level(&g, t, level.exp()).unwrap();
        prop_assert!((x - 2.0 * t + level / rate).abs() < 1e-9);
    }
}
