use kpp_core::ansatz_check::*;
use kpp_core::report::{Claim, SampleDomain, MISMATCH_TOL};
use proptest::prelude::*;

const TESTED_R: [f64; 5] = [-1.0, 0.0, 0.5, 1.0, 1.25];

fn psi_domain(spec: &AnsatzSpec) -> SampleDomain {
    default_psi_domain(spec)
}

fn tw_domain() -> SampleDomain {
    SampleDomain { t_range: (0.0, 1e6), z_range: (-20.0, 40.0), n_t: 30, n_z: 120 }
}

#[test]
fn psi_examples() {
    assert_eq!(psi_eval(0.5, 0.5, 3.0, 0.0), 0.0);
    // w(1; 1/2) = ∫_0^1 e^{-s²/4} ds = √π erf(1/2)
    let w1 = std::f64::consts::PI.sqrt() * libm::erf(0.5);
    assert!((psi_eval(0.5, 0.5, 1.0, 1.0) - (-1.0f64).exp() * w1).abs() < 1e-14);
    let exact = 2.0 * (-2.25f64).exp();
    assert!((psi_eval(1.5, 1.5, 4.0, 2.0) - exact).abs() < 1e-14);
}

fn identity_samples() -> Vec<(f64, f64)> {
    vec![(2.0, 0.3), (5.0, 1.0), (10.0, 5.0), (30.0, 2.0), (60.0, 12.0), (100.0, 4.0)]
}

#[test]
fn linear_identity_without_drift_term_vanishes() {
    let rep = check_linear_residual_identity(-1.0, 0.0, &identity_samples()).unwrap();
    assert!(rep.passed(), "{}", rep.text_block());
    assert!(rep.observed.unwrap().1 <= 1e-6);
}

#[test]
fn linear_identity_matches_at_r_one() {
    let rep = check_linear_residual_identity(1.0, 1.0, &[(10.0, 5.0)]).unwrap();
    assert!(rep.passed(), "{}", rep.text_block());
    assert!(rep.closed_form_mismatch.unwrap() <= MISMATCH_TOL);
    let rep = check_linear_residual_identity(0.25, 0.25, &identity_samples()).unwrap();
    assert!(rep.passed(), "{}", rep.text_block());
    assert!(check_linear_residual_identity(1.0, 1.0, &[(1.0, 1.0)]).is_err());
}

#[test]
fn gaussian_case_residual_follows_sign_of_slope() {
    let spec = AnsatzSpec::PsiSuper { r: 1.5, r_prime: 1.5, m: 0.0, delta: 0.0, t0: 1.0 };
    for &(t, z) in &[(4.0, 1.0), (4.0, 2.0), (9.0, 6.0), (16.0, 9.0)] {
        let x = z + spec.shift(t);
        let y: f64 = z / t.sqrt();
        let slope = (1.0 - 0.5 * y * y) * (-0.25 * y * y).exp();
        let cf = spec.closed_form(t, x).unwrap();
        assert_eq!(cf.signum(), slope.signum(), "(t, z) = ({t}, {z})");
    }
    let rep = check_linear_residual_identity(1.5, 1.5, &identity_samples()).unwrap();
    assert!(rep.passed(), "{}", rep.text_block());
}

#[test]
fn supersolutions_pass_with_auto_constants() {
    for r in TESTED_R {
        let spec = AnsatzSpec::psi_super(r).unwrap();
        let rep = check_supersolution(&spec, &psi_domain(&spec)).unwrap();
        assert!(rep.passed(), "{}", rep.text_block());
        if r <= 0.0 {
            assert_eq!(rep.get_param("M"), Some(0.0));
        }
    }
}

#[test]
fn supersolution_needs_the_drift_correction() {
    // Without M the bracket is r' w', which turns negative where w decreases.
    let spec = AnsatzSpec::psi_super_with(1.0, 0.0, 1.0).unwrap();
    let rep = check_supersolution(&spec, &SampleDomain { t_range: (10.0, 1e6), z_range: (0.0, 50.0), n_t: 20, n_z: 200 }).unwrap();
    assert!(!rep.passed());
    assert!(rep.worst_signed_residual < 0.0);
}

#[test]
fn subsolutions_pass_with_auto_constants() {
    for r in TESTED_R {
        let spec = AnsatzSpec::psi_sub(r).unwrap();
        let rep = check_subsolution(&spec, &psi_domain(&spec)).unwrap();
        assert!(rep.passed(), "{}", rep.text_block());
        let eps = rep.get_param("epsilon").unwrap();
        assert!(eps > 0.0 && eps < rep.get_param("epsilon_bound").unwrap());
    }
}

#[test]
fn oversized_epsilon_is_reported_in_the_inner_zone() {
    let spec = AnsatzSpec::psi_sub(0.5).unwrap().with_epsilon_scale(10.0);
    let rep = check_subsolution(&spec, &psi_domain(&spec)).unwrap();
    assert!(!rep.passed());
    assert!(rep.notes.iter().any(|n| n.contains("z <= delta sqrt(t)") && n.contains("violates")));
}

#[test]
fn subsolution_bracket_is_negative_at_the_boundary() {
    let spec = AnsatzSpec::psi_sub(0.5).unwrap();
    let AnsatzSpec::PsiSub { t0, .. } = spec else { unreachable!() };
    let rep = check_subsolution(&spec, &SampleDomain { t_range: (t0, 1e6), z_range: (0.0, 0.0), n_t: 10, n_z: 1 }).unwrap();
    assert!(rep.passed());
    assert!(rep.observed.unwrap().1 < 0.0);
}

#[test]
fn shifted_wave_signs() {
    for (k, claim) in [(0.0, Claim::NonPositive), (1.0, Claim::Vanishing), (3.0, Claim::NonNegative)] {
        let rep = check_tw_shift(k, 1.0, &tw_domain()).unwrap();
        assert_eq!(rep.claim, claim);
        assert!(rep.passed(), "{}", rep.text_block());
    }
    let rep = check_tw_shift(1.0, 1.0, &tw_domain()).unwrap();
    let (lo, hi) = rep.observed.unwrap();
    assert!(lo == 0.0 && hi == 0.0);
}

#[test]
fn shifted_wave_residual_is_antisymmetric_in_r() {
    let a = AnsatzSpec::tw_shift(0.3, 2.0).unwrap();
    let b = AnsatzSpec::tw_shift(1.7, 2.0).unwrap();
    for &(t, z) in &[(0.0, -5.0), (3.0, 0.0), (50.0, 7.5), (1e4, 20.0)] {
        let ra = a.closed_form(t, z + a.shift(t)).unwrap();
        let rb = b.closed_form(t, z + b.shift(t)).unwrap();
        assert!((ra + rb).abs() <= 1e-12, "({t}, {z}): {ra} vs {rb}");
    }
}

#[test]
fn phi_eta_examples() {
    let spec = AnsatzSpec::phi_eta_sub(-1.0).unwrap();
    let (full, bound) = spec.phi_expression(100.0, 10.0).unwrap();
    assert!(full <= 0.0 && full <= bound && bound <= 0.0);
    // z = 2√t saturates e^{ηz/√t} = γ, leaving only the vanished 1/t term
    for t in [4.0, 100.0, 1e4] {
        let (_, bound) = spec.phi_expression(t, 2.0 * f64::sqrt(t)).unwrap();
        assert!(bound.abs() < 1e-12, "t = {t}: {bound}");
    }
    let sweep = SampleDomain { t_range: (10.0, 1e5), z_range: (0.0, 2.0), n_t: 60, n_z: 200 };
    for r in [-1.0, -0.25] {
        let rep = check_phi_eta_sub(r, &sweep).unwrap();
        assert!(rep.passed(), "{}", rep.text_block());
    }
    let outside = SampleDomain { t_range: (10.0, 1e5), z_range: (0.0, 2.5), n_t: 5, n_z: 5 };
    assert!(check_phi_eta_sub(-1.0, &outside).is_err());
    assert!(AnsatzSpec::phi_eta_sub(0.5).is_err());
}

#[test]
fn critical_sub_examples() {
    let spec = AnsatzSpec::dirichlet_sub(None, None).unwrap();
    let point = SampleDomain { t_range: (1e4, 1e4), z_range: (1.0, 1.0), n_t: 1, n_z: 1 };
    assert!(check_critical_sub(&spec, &point).unwrap().passed());
    let full = SampleDomain { t_range: (1.0, 1e6), z_range: (0.0, 30.0), n_t: 30, n_z: 100 };
    assert!(check_critical_sub(&spec, &full).unwrap().passed());
    // far to the right of the front the bracket is dominated by -M/4
    let t: f64 = 1e4;
    let far = SampleDomain { t_range: (t, t), z_range: (3.0 * t.ln(), 3.0 * t.ln() + 10.0), n_t: 1, n_z: 11 };
    let rep = check_critical_sub(&spec, &far).unwrap();
    let m = rep.get_param("M").unwrap();
    assert!(rep.observed.unwrap().1 < -0.24 * m);
    assert!(AnsatzSpec::dirichlet_sub(Some(4.0), Some(0.05)).is_err());
}

#[test]
fn critical_super_examples() {
    let spec = AnsatzSpec::dirichlet_super(None).unwrap();
    let t: f64 = 1e4;
    let s = 2.0 * t.sqrt() / t.powf(0.75);
    let point = SampleDomain { t_range: (t, t), z_range: (s, s), n_t: 1, n_z: 1 };
    assert!(check_critical_super(&spec, &point).unwrap().passed());
    let AnsatzSpec::DirichletSuper { t0, .. } = spec else { unreachable!() };
    let sweep = SampleDomain { t_range: (t0, 1e8), z_range: (1e-3, 4.0), n_t: 30, n_z: 80 };
    assert!(check_critical_super(&spec, &sweep).unwrap().passed());
    let zero = AnsatzSpec::dirichlet_super(Some(0.0)).unwrap();
    let rep = check_critical_super(&zero, &SampleDomain { t_range: (1e2, 1e8), ..sweep }).unwrap();
    assert!(!rep.passed());
}

#[test]
fn critical_super_is_trivial_where_v_increases() {
    let spec = AnsatzSpec::dirichlet_super(Some(0.0)).unwrap();
    let rep = check_critical_super(&spec, &SampleDomain { t_range: (1e2, 1e6), z_range: (1e-3, 1e-2), n_t: 10, n_z: 10 }).unwrap();
    assert!(rep.passed() || rep.worst_signed_residual >= -1e-12, "{}", rep.text_block());
}

fn all_specs() -> Vec<AnsatzSpec> {
    let mut v = Vec::new();
    for r in TESTED_R {
        v.push(AnsatzSpec::psi_super(r).unwrap());
        v.push(AnsatzSpec::psi_sub(r).unwrap());
    }
    for k in [0.0, 1.0, 3.0] {
        v.push(AnsatzSpec::tw_shift(k, 1.0).unwrap());
    }
    v.push(AnsatzSpec::phi_eta_sub(-1.0).unwrap());
    v.push(AnsatzSpec::phi_eta_sub(-0.25).unwrap());
    v.push(AnsatzSpec::dirichlet_sub(None, None).unwrap());
    v.push(AnsatzSpec::dirichlet_super(None).unwrap());
    v
}

#[test]
fn closed_forms_match_finite_differences() {
    for spec in all_specs() {
        let (pts, h) = default_fd_samples(&spec);
        assert_eq!(pts.len(), FD_SAMPLES);
        for s in validate_closed_form(&spec, &pts, h).unwrap() {
            assert!(s.mismatch <= MISMATCH_TOL, "{}: {s:?}", spec.kind().name());
        }
    }
}

/// A wrong closed form is caught: drop the drift term from the psi identity.
#[test]
fn finite_differences_detect_a_wrong_identity() {
    let right = AnsatzSpec::PsiSuper { r: 1.0, r_prime: 1.0, m: 0.0, delta: 0.0, t0: 1.0 };
    let (pts, h) = default_fd_samples(&right);
    let fd = validate_closed_form(&right, &pts, h).unwrap();
    let off = fd.iter().map(|s| (s.finite_difference - 0.9 * s.closed_form).abs() / s.closed_form.abs()).fold(0.0, f64::max);
    assert!(off > 1e-2);
}

#[test]
fn verdicts_are_stable_under_refinement() {
    for r in [0.5, 1.25] {
        let spec = AnsatzSpec::psi_super(r).unwrap();
        let d = psi_domain(&spec);
        let fine = SampleDomain { n_t: 2 * d.n_t, n_z: 2 * d.n_z, ..d };
        assert!(check_supersolution(&spec, &d).unwrap().passed());
        assert!(check_supersolution(&spec, &fine).unwrap().passed());
        let spec = AnsatzSpec::psi_sub(r).unwrap();
        let d = psi_domain(&spec);
        let fine = SampleDomain { n_t: 2 * d.n_t, n_z: 2 * d.n_z, ..d };
        assert!(check_subsolution(&spec, &d).unwrap().passed());
        assert!(check_subsolution(&spec, &fine).unwrap().passed());
    }
    let coarse = SampleDomain { t_range: (10.0, 1e5), z_range: (0.0, 2.0), n_t: 30, n_z: 100 };
    let fine = SampleDomain { n_t: 60, n_z: 200, ..coarse };
    assert!(check_phi_eta_sub(-1.0, &coarse).unwrap().passed());
    assert!(check_phi_eta_sub(-1.0, &fine).unwrap().passed());
}

#[test]
fn initial_domination_fails_only_for_the_gaussian_profile() {
    let (m, t0) = (4.0, 64.0);
    let x0 = 2.0 * t0;
    let bounded: Vec<f64> = [50.0, 200.0, 400.0].iter().map(|d| initial_domination_log_constant(1.0, m, t0, 1.0, x0 + d).unwrap()).collect();
    assert!((bounded[2] - bounded[0]).abs() < 1e-9, "{bounded:?}");
    let gaussian: Vec<f64> = [50.0, 200.0, 400.0].iter().map(|d| initial_domination_log_constant(1.5, m, t0, 1.0, x0 + d).unwrap()).collect();
    assert!(gaussian[1] > gaussian[0] + 10.0 && gaussian[2] > gaussian[1] + 100.0, "{gaussian:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_vanishes_on_the_boundary(r in -1.0f64..1.4, rp in -2.0f64..1.0, t in 0.1f64..1e4) {
        prop_assert_eq!(psi_eval(r, rp, t, 0.0), 0.0);
    }

    #[test]
    fn psi_super_bracket_positive_for_delay_profiles(r in 0.05f64..1.4, lt in 0.0f64..1.0, y in 0.0f64..50.0) {
        let spec = AnsatzSpec::psi_super(r).unwrap();
        let AnsatzSpec::PsiSuper { t0, .. } = spec else { unreachable!() };
        let t = t0 * 10f64.powf(3.0 * lt);
        let z = y * t.sqrt();
        let cf = spec.closed_form(t, z + spec.shift(t)).unwrap();
        prop_assert!(cf >= -1e-300);
    }
}
