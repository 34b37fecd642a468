//! Sign certificates for the comparison functions of the front estimates.
//!
//! Each ansatz comes with a closed-form expression for the parabolic operator
//! applied to it. A check evaluates the sign-carrying factor of that
//! expression on a grid, and separately compares the full closed form against
//! Richardson-refined finite differences of the ansatz itself, so the algebra
//! behind the closed form is tested independently of the sign claim.
//!
//! The `z_range` of a [`SampleDomain`] is read per check:
//!
//! * psi checks: the similarity variable `y = z/√t`;
//! * `phi_eta_sub`: `z/√t`, at most 2;
//! * `tw_shift`, `critical_sub`: `z` itself;
//! * `critical_super`: `z / t^{3/4}`, sampled log-spaced.

use crate::error::{Error, Result};
use crate::heat_kernel::{v_dirichlet, v_dirichlet_dx, verify_gradient_bound};
use crate::report::{Claim, SampleDomain, Verdict, VerificationReport, MISMATCH_TOL, SIGN_SLACK};
use crate::special_fn::{w_eval, w_prime_eval};
use crate::wave_ode::{minimal_wave, phi_gamma, WaveProfile};

/// Random-like `(t, z)` samples used for the finite-difference comparison.
pub const FD_SAMPLES: usize = 20;
/// The mismatch is measured relative to `max(|closed form|, FD_FLOOR · |u|)`.
pub const FD_FLOOR: f64 = 1e-4;
/// Scan step for the auto-selected thresholds.
pub const SCAN_STEP: f64 = 1e-3;
/// Upper end of the similarity variable for psi checks and constant sizing.
pub const Y_MAX: f64 = 50.0;
const QUAD_TOL: f64 = 1e-13;
const PSI_FD_STEP: f64 = 1e-3;
const PROFILE_FD_STEP: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnsatzKind {
    PsiSuper,
    PsiSub,
    TwShift,
    PhiEtaSub,
    DirichletSub,
    DirichletSuper,
}

impl AnsatzKind {
    pub fn name(self) -> &'static str {
        match self {
            AnsatzKind::PsiSuper => "psi_super",
            AnsatzKind::PsiSub => "psi_sub",
            AnsatzKind::TwShift => "tw_shift",
            AnsatzKind::PhiEtaSub => "phi_eta_sub",
            AnsatzKind::DirichletSub => "dirichlet_sub",
            AnsatzKind::DirichletSuper => "dirichlet_super",
        }
    }
}

/// A comparison function with all of its constants fixed.
#[derive(Debug, Clone, PartialEq)]
pub enum AnsatzSpec {
    /// `(1 - M/√t) ψ(t, x - 2t + r' ln t)`.
    PsiSuper { r: f64, r_prime: f64, m: f64, delta: f64, t0: f64 },
    /// `ε (1 + M/√t) ψ(t, x - 2t + r' ln t)` with `r' = r - 2`.
    PsiSub { r: f64, r_prime: f64, m: f64, epsilon: f64, epsilon_bound: f64, delta: f64, t0: f64 },
    /// `U(x - 2t + r ln(t + t0))`.
    TwShift { k: f64, r: f64, t0: f64, wave: Box<WaveProfile> },
    /// `e^{ηz/√t} φ_γ(z)` for `z > 0`, `1/(2γ)` otherwise, `z = x - 2t + r ln t`.
    PhiEtaSub { r: f64, eta: f64, gamma: f64, phi: Box<WaveProfile> },
    /// `δ (1 + M (t+1)^{-1/4}) e^{-z} v(t, z)`, `z = x - 2t`.
    DirichletSub { m: f64, delta: f64, sup_weighted: f64 },
    /// `(1 - M t^{-1/4}) t^{3/2}/ln t · e^{-z} v(t, z)`,
    /// `z = x - 2t + (3/2) ln t - ln ln t`.
    DirichletSuper { m: f64, c_hat: f64, t0: f64 },
}

/// `(w, w')` extended to `y < 0` as an odd function.
fn w_pair(r: f64, y: f64) -> Result<(f64, f64)> {
    let a = y.abs();
    let w = w_eval(r, a)?;
    let wp = w_prime_eval(r, a)?;
    Ok((w.copysign(y), wp))
}

/// `ψ(t, z) = e^{-z} t^{1/2 + r' - r} w(z/√t)`.
pub fn psi_eval(r: f64, r_prime: f64, t: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    match w_pair(r, z / t.sqrt()) {
        Ok((w, _)) => (-z).exp() * t.powf(0.5 + r_prime - r) * w,
        Err(_) => f64::NAN,
    }
}

fn scan(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    let n = ((hi - lo) / SCAN_STEP).round() as usize;
    (0..=n).map(move |j| lo + (hi - lo) * j as f64 / n as f64)
}

/// Largest `y <= 1` on the scan with `above(w'(s))` for all scanned `s < y`
/// (`inclusive = false`) or `s <= y` (`inclusive = true`).
fn threshold(r: f64, inclusive: bool, above: impl Fn(f64) -> bool) -> Result<f64> {
    let mut last_good = 0.0;
    for y in scan(0.0, 1.0) {
        if !above(w_prime_eval(r, y)?) {
            return Ok(if inclusive { last_good } else { y });
        }
        last_good = y;
    }
    Ok(1.0)
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || lo == hi {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|j| (a + (b - a) * j as f64 / (n - 1) as f64).exp()).collect()
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
}

/// Time samples: log-spaced when the range starts above zero.
fn time_grid(range: (f64, f64), n: usize) -> Vec<f64> {
    if range.0 > 0.0 {
        geometric(range.0, range.1, n)
    } else {
        let mut ts = vec![range.0];
        ts.extend(geometric(1e-2_f64.min(range.1), range.1, n.saturating_sub(1)));
        ts
    }
}

/// Similarity samples clustered near 0 where the two-zone arguments meet.
fn similarity_grid(range: (f64, f64), n: usize) -> Vec<f64> {
    uniform(0.0, 1.0, n).into_iter().map(|s| range.0 + (range.1 - range.0) * s * s).collect()
}

/// Additive-recurrence points in the unit square.
fn r2_sequence(n: usize) -> Vec<(f64, f64)> {
    let g = 1.324_717_957_244_746;
    let (a1, a2) = (1.0 / g, 1.0 / (g * g));
    (1..=n).map(|j| ((0.5 + a1 * j as f64).fract(), (0.5 + a2 * j as f64).fract())).collect()
}

/// Scaled domain check shared by every report.
fn check_domain(d: &SampleDomain) -> Result<()> {
    if !(d.t_range.0 >= 0.0 && d.t_range.1 >= d.t_range.0) || !(d.z_range.1 >= d.z_range.0) {
        return Err(Error::InvalidSpec(format!("bad sample domain {d:?}")));
    }
    if d.n_t == 0 || d.n_z == 0 {
        return Err(Error::InvalidSpec("sample domain needs at least one point per axis".into()));
    }
    Ok(())
}

impl AnsatzSpec {
    /// ψ super-solution with auto-selected `δ`, `M`, `t0`.
    pub fn psi_super(r: f64) -> Result<Self> {
        let r_prime = r.max(0.0);
        if r_prime == 0.0 {
            return Ok(AnsatzSpec::PsiSuper { r, r_prime, m: 0.0, delta: 0.0, t0: 1.0 });
        }
        let delta = threshold(r, false, |wp| wp > 0.0)?;
        let mut worst = 0.0f64;
        for y in scan(delta.max(SCAN_STEP), Y_MAX) {
            let (w, wp) = w_pair(r, y)?;
            worst = worst.max(2.0 * r_prime * wp.abs() / w);
        }
        Self::psi_super_with(r, (2.0 * worst).ceil(), delta)
    }

    /// Super-solution with explicit `M`; `t0 = 4M²` so that `1 - M/√t0 = 1/2`.
    pub fn psi_super_with(r: f64, m: f64, delta: f64) -> Result<Self> {
        if !(r < 1.5) {
            return Err(Error::InvalidSpec(format!("psi ansatz needs r < 3/2, got {r}")));
        }
        if !(m >= 0.0) {
            return Err(Error::InvalidSpec(format!("M must be >= 0, got {m}")));
        }
        Ok(AnsatzSpec::PsiSuper { r, r_prime: r.max(0.0), m, delta, t0: (4.0 * m * m).max(1.0) })
    }

    /// ψ sub-solution with auto-selected `δ`, `M`, `ε`, `t0`.
    pub fn psi_sub(r: f64) -> Result<Self> {
        if !(r < 1.5) {
            return Err(Error::InvalidSpec(format!("psi ansatz needs r < 3/2, got {r}")));
        }
        let r_prime = r - 2.0;
        let k = 1.0 - 2.0 * r;
        let delta = threshold(r, true, |wp| wp > 0.5)?;
        if delta <= 0.0 {
            return Err(Error::NonConvergence(format!("no interval with w' > 1/2 found for r = {r}")));
        }
        let mut slope_bound = 0.0f64;
        let mut tail_bound = 0.0f64;
        for y in scan(delta, Y_MAX) {
            let (w, wp) = w_pair(r, y)?;
            slope_bound = slope_bound.max(8.0 * (r_prime * wp).abs() / w);
            tail_bound = tail_bound.max(w / y.powf(k));
        }
        let m = (2.0 * slope_bound.max(tail_bound)).ceil();
        let t0 = m * m;
        let mut w2_max = 0.0f64;
        for y in scan(0.0, delta) {
            w2_max = w2_max.max(w_eval(r, y)?.powi(2));
        }
        let mut far = 0.0f64;
        for y in scan(delta, Y_MAX) {
            far = far.max((-y * t0.sqrt()).exp() * w_eval(r, y)?);
        }
        let epsilon_bound = -r_prime / (2.0 * (1.0 + m) * w2_max);
        let far_bound = if far > 0.0 { m / (16.0 * far) } else { f64::INFINITY };
        let epsilon = 0.5 * epsilon_bound.min(far_bound);
        Ok(AnsatzSpec::PsiSub { r, r_prime, m, epsilon, epsilon_bound, delta, t0 })
    }

    /// Same spec with `ε` multiplied by `scale` (a deliberate violation when large).
    pub fn with_epsilon_scale(self, scale: f64) -> Self {
        match self {
            AnsatzSpec::PsiSub { r, r_prime, m, epsilon, epsilon_bound, delta, t0 } => {
                AnsatzSpec::PsiSub { r, r_prime, m, epsilon: epsilon * scale, epsilon_bound, delta, t0 }
            }
            other => other,
        }
    }

    /// Shifted minimal wave; the wave is computed on `[-30, 60]`.
    pub fn tw_shift(k: f64, t0: f64) -> Result<Self> {
        if !(t0 > 0.0) {
            return Err(Error::InvalidSpec(format!("t0 must be positive, got {t0}")));
        }
        let wave = minimal_wave(-30.0, 60.0, 1e-3)?;
        Ok(AnsatzSpec::TwShift { k, r: (1.0 - k) / 2.0, t0, wave: Box::new(wave) })
    }

    /// Advance-case sub-solution with `η = √-r`, `γ = e^{2η}`.
    pub fn phi_eta_sub(r: f64) -> Result<Self> {
        if !(r < 0.0) {
            return Err(Error::InvalidSpec(format!("phi_eta ansatz needs r < 0, got {r}")));
        }
        let eta = (-r).sqrt();
        let gamma = (2.0 * eta).exp();
        let phi = phi_gamma(gamma, 60.0, 1e-3)?;
        Ok(AnsatzSpec::PhiEtaSub { r, eta, gamma, phi: Box::new(phi) })
    }

    /// Critical sub-solution. `M` defaults to 8 times the sampled supremum of
    /// `e^{-z} v(t, z) (t+1)^{5/4}`, `δ` to `0.5/(1+M)²`.
    pub fn dirichlet_sub(m: Option<f64>, delta: Option<f64>) -> Result<Self> {
        let sup_weighted = weighted_sup(1.25)?;
        let m = m.unwrap_or(8.0 * sup_weighted);
        if !(m >= 0.0) {
            return Err(Error::InvalidSpec(format!("M must be >= 0, got {m}")));
        }
        let delta = delta.unwrap_or(0.5 / (1.0 + m).powi(2));
        if !(delta > 0.0 && delta * (1.0 + m).powi(2) < 1.0) {
            return Err(Error::InvalidSpec(format!("need 0 < δ and δ(1+M)² < 1, got δ = {delta}, M = {m}")));
        }
        Ok(AnsatzSpec::DirichletSub { m, delta, sup_weighted })
    }

    /// Critical super-solution. `M` defaults to 8 times the empirical gradient
    /// constant; `t0` makes `1 - M t0^{-1/4} >= 1/2`.
    pub fn dirichlet_super(m: Option<f64>) -> Result<Self> {
        let ts: Vec<f64> = (0..=12).map(|j| 10f64.powf(2.0 + 0.5 * j as f64)).collect();
        let c_hat = verify_gradient_bound(&ts, 120, 1e-10)?.c_hat;
        let m = m.unwrap_or(8.0 * c_hat);
        if !(m >= 0.0) {
            return Err(Error::InvalidSpec(format!("M must be >= 0, got {m}")));
        }
        Ok(AnsatzSpec::DirichletSuper { m, c_hat, t0: (2.0 * m).powi(4).max(100.0) })
    }

    pub fn kind(&self) -> AnsatzKind {
        match self {
            AnsatzSpec::PsiSuper { .. } => AnsatzKind::PsiSuper,
            AnsatzSpec::PsiSub { .. } => AnsatzKind::PsiSub,
            AnsatzSpec::TwShift { .. } => AnsatzKind::TwShift,
            AnsatzSpec::PhiEtaSub { .. } => AnsatzKind::PhiEtaSub,
            AnsatzSpec::DirichletSub { .. } => AnsatzKind::DirichletSub,
            AnsatzSpec::DirichletSuper { .. } => AnsatzKind::DirichletSuper,
        }
    }

    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        match *self {
            AnsatzSpec::PsiSuper { r, r_prime, m, delta, t0 } => {
                vec![("r", r), ("r_prime", r_prime), ("M", m), ("delta", delta), ("t0", t0)]
            }
            AnsatzSpec::PsiSub { r, r_prime, m, epsilon, epsilon_bound, delta, t0 } => vec![
                ("r", r),
                ("r_prime", r_prime),
                ("M", m),
                ("epsilon", epsilon),
                ("epsilon_bound", epsilon_bound),
                ("delta", delta),
                ("t0", t0),
            ],
            AnsatzSpec::TwShift { k, r, t0, .. } => vec![("k", k), ("r", r), ("t0", t0)],
            AnsatzSpec::PhiEtaSub { r, eta, gamma, .. } => vec![("r", r), ("eta", eta), ("gamma", gamma)],
            AnsatzSpec::DirichletSub { m, delta, sup_weighted } => {
                vec![("M", m), ("delta", delta), ("sup_weighted", sup_weighted)]
            }
            AnsatzSpec::DirichletSuper { m, c_hat, t0 } => vec![("M", m), ("c_hat", c_hat), ("t0", t0)],
        }
    }

    /// Front coordinate `s(t)` with `z = x - s(t)`.
    pub fn shift(&self, t: f64) -> f64 {
        match *self {
            AnsatzSpec::PsiSuper { r_prime, .. } | AnsatzSpec::PsiSub { r_prime, .. } => 2.0 * t - r_prime * t.ln(),
            AnsatzSpec::TwShift { r, t0, .. } => 2.0 * t - r * (t + t0).ln(),
            AnsatzSpec::PhiEtaSub { r, .. } => 2.0 * t - r * t.ln(),
            AnsatzSpec::DirichletSub { .. } => 2.0 * t,
            AnsatzSpec::DirichletSuper { .. } => 2.0 * t - 1.5 * t.ln() + t.ln().ln(),
        }
    }

    /// Whether the operator includes the quadratic term (`false`: `∂t - ∂xx - 1`).
    pub fn nonlinear(&self) -> bool {
        !matches!(self, AnsatzSpec::PsiSuper { .. } | AnsatzSpec::DirichletSuper { .. })
    }

    /// The ansatz in the original variables.
    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        let z = x - self.shift(t);
        match self {
            AnsatzSpec::PsiSuper { r, r_prime, m, .. } => Ok((1.0 - m / t.sqrt()) * psi_eval(*r, *r_prime, t, z)),
            AnsatzSpec::PsiSub { r, r_prime, m, epsilon, .. } => {
                Ok(epsilon * (1.0 + m / t.sqrt()) * psi_eval(*r, *r_prime, t, z))
            }
            AnsatzSpec::TwShift { wave, .. } => Ok(wave.eval(z)),
            AnsatzSpec::PhiEtaSub { eta, gamma, phi, .. } => {
                if z <= 0.0 {
                    Ok(0.5 / gamma)
                } else {
                    Ok((eta * z / t.sqrt()).exp() * phi.eval(z))
                }
            }
            AnsatzSpec::DirichletSub { m, delta, .. } => {
                let mt = 1.0 + m * (t + 1.0).powf(-0.25);
                Ok(delta * mt * (-z).exp() * v_dirichlet(t, z.max(0.0), QUAD_TOL)?.value)
            }
            AnsatzSpec::DirichletSuper { m, .. } => {
                let mt = 1.0 - m * t.powf(-0.25);
                let g = t.powf(1.5) / t.ln();
                Ok(mt * g * (-z).exp() * v_dirichlet(t, z.max(0.0), QUAD_TOL)?.value)
            }
        }
    }

    /// Closed form of the operator applied to the ansatz at `(t, x)`.
    pub fn closed_form(&self, t: f64, x: f64) -> Result<f64> {
        let z = x - self.shift(t);
        match *self {
            AnsatzSpec::PsiSuper { r, r_prime, m, .. } => {
                let (w, wp) = w_pair(r, z / t.sqrt())?;
                let bracket = (1.0 - m / t.sqrt()) * r_prime * wp + 0.5 * m * w;
                Ok((-z).exp() * t.powf(-(1.0 + r - r_prime)) * bracket)
            }
            AnsatzSpec::PsiSub { r, r_prime, m, epsilon, .. } => {
                let (w, wp) = w_pair(r, z / t.sqrt())?;
                let q = 1.0 + m / t.sqrt();
                let braced =
                    -0.5 * m * w + q * (r_prime * wp + q * epsilon * (-z).exp() * t.powf(2.0 + r_prime - r) * w * w);
                Ok(epsilon * (-z).exp() * t.powf(-(1.0 + r - r_prime)) * braced)
            }
            AnsatzSpec::TwShift { r, t0, ref wave, .. } => Ok(r / (t + t0) * wave.eval_prime(z)),
            AnsatzSpec::PhiEtaSub { eta, ref phi, .. } => {
                if z <= 0.0 {
                    return Ok(0.0);
                }
                let (p, _) = phi.eval_with_slope(z);
                Ok((eta * z / t.sqrt()).exp() * p * self.phi_expression(t, z)?.0)
            }
            AnsatzSpec::DirichletSub { m, delta, .. } => {
                let v = v_dirichlet(t, z, QUAD_TOL)?.value;
                let mt = 1.0 + m * (t + 1.0).powf(-0.25);
                let e = (-z).exp();
                Ok(delta * e * v * (delta * mt * mt * e * v - 0.25 * m * (t + 1.0).powf(-1.25)))
            }
            AnsatzSpec::DirichletSuper { m, .. } => {
                let v = v_dirichlet(t, z, QUAD_TOL)?.value;
                let vx = v_dirichlet_dx(t, z, QUAD_TOL)?.value;
                let lt = t.ln();
                let mt = 1.0 - m * t.powf(-0.25);
                let dm = 0.25 * m * t.powf(-1.25);
                let a = 1.5 / t - 1.0 / (t * lt);
                Ok(t.powf(1.5) / lt * (-z).exp() * (dm * v + mt * a * vx))
            }
        }
    }

    /// Normalized residual `e^{-ηz/√t} L u / φ` and the dropped-terms bound
    /// `(-η² - r)/t + (e^{ηz/√t} - γ) φ`, for `z > 0`.
    pub fn phi_expression(&self, t: f64, z: f64) -> Result<(f64, f64)> {
        let AnsatzSpec::PhiEtaSub { r, eta, gamma, ref phi } = *self else {
            return Err(Error::InvalidSpec("phi expression needs a phi_eta spec".into()));
        };
        let (p, q) = phi_value_and_log_slope(phi, z);
        let st = t.sqrt();
        let e = (eta * z / st).exp();
        let full = -eta * z / (2.0 * t * st) - 2.0 * eta * (1.0 + q) / st - eta * eta / t + r * q / t
            + r * eta / (t * st)
            + (e - gamma) * p;
        let bound = (-eta * eta - r) / t + (e - gamma) * p;
        Ok((full, bound))
    }

    /// Finite-difference sampling box `(t_lo, t_hi, z_lo, z_hi)` with `z`
    /// scaled as in the module docs, and the step used.
    fn fd_box(&self) -> ((f64, f64, f64, f64), f64) {
        match self {
            AnsatzSpec::PsiSuper { .. } | AnsatzSpec::PsiSub { .. } => ((2.0, 100.0, 0.05, 3.0), PSI_FD_STEP),
            AnsatzSpec::TwShift { .. } => ((2.0, 100.0, -10.0, 20.0), PROFILE_FD_STEP),
            AnsatzSpec::PhiEtaSub { .. } => ((2.0, 100.0, 0.05, 2.0), PROFILE_FD_STEP),
            AnsatzSpec::DirichletSub { .. } => ((2.0, 50.0, 0.5, 10.0), PROFILE_FD_STEP),
            AnsatzSpec::DirichletSuper { .. } => ((3.0, 50.0, 0.5, 10.0), PROFILE_FD_STEP),
        }
    }

    fn fd_z(&self, t: f64, s: f64) -> f64 {
        match self {
            AnsatzSpec::PsiSuper { .. } | AnsatzSpec::PsiSub { .. } | AnsatzSpec::PhiEtaSub { .. } => s * t.sqrt(),
            _ => s,
        }
    }
}

/// `(φ(z), φ'(z)/φ(z))`, continued past the sampled range by the `z e^{-z}` tail.
fn phi_value_and_log_slope(phi: &WaveProfile, z: f64) -> (f64, f64) {
    if z <= phi.z_max() {
        let (p, dp) = phi.eval_with_slope(z);
        (p, dp / p)
    } else {
        let zl = phi.z_max();
        let ln_p = phi.values[phi.len() - 1].ln() + (z / zl).ln() - (z - zl);
        (ln_p.exp(), 1.0 / z - 1.0)
    }
}

/// Sampled `sup e^{-z} v(t, z) (t+1)^p` over `t ∈ [1e-2, 1e8]`, `z ∈ [0, 40]`.
fn weighted_sup(p: f64) -> Result<f64> {
    let mut s = 0.0f64;
    for t in geometric(1e-2, 1e8, 41) {
        let w = (t + 1.0).powf(p);
        for z in uniform(0.0, 40.0, 161) {
            s = s.max((-z).exp() * v_dirichlet(t, z, 1e-10)?.value * w);
        }
    }
    Ok(s)
}

/// One closed-form versus finite-difference comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSample {
    pub t: f64,
    pub z: f64,
    pub value: f64,
    pub closed_form: f64,
    pub finite_difference: f64,
    /// `|R(h) - R(h/2)|` before extrapolation.
    pub step_change: f64,
    pub mismatch: f64,
}

fn fd_operator(spec: &AnsatzSpec, t: f64, x: f64, h: f64) -> Result<(f64, f64)> {
    let c = spec.eval(t, x)?;
    let ut = (spec.eval(t + h, x)? - spec.eval(t - h, x)?) / (2.0 * h);
    let uxx = (spec.eval(t, x + h)? - 2.0 * c + spec.eval(t, x - h)?) / (h * h);
    let quad = if spec.nonlinear() { c * c } else { 0.0 };
    Ok((ut - uxx - c + quad, c))
}

/// Compares the closed form with Richardson-extrapolated central differences
/// (steps `h` and `h/2`) at the given `(t, z)` points.
pub fn validate_closed_form(spec: &AnsatzSpec, samples: &[(f64, f64)], h: f64) -> Result<Vec<FdSample>> {
    samples
        .iter()
        .map(|&(t, z)| {
            let x = z + spec.shift(t);
            let (coarse, value) = fd_operator(spec, t, x, h)?;
            let (fine, _) = fd_operator(spec, t, x, 0.5 * h)?;
            let fd = (4.0 * fine - coarse) / 3.0;
            let cf = spec.closed_form(t, x)?;
            let scale = cf.abs().max(FD_FLOOR * value.abs());
            let mismatch = if scale > 0.0 { (fd - cf).abs() / scale } else { (fd - cf).abs() };
            Ok(FdSample {
                t,
                z,
                value,
                closed_form: cf,
                finite_difference: fd,
                step_change: (fine - coarse).abs(),
                mismatch,
            })
        })
        .collect()
}

/// The default [`FD_SAMPLES`] comparison points of a spec, with its step.
pub fn default_fd_samples(spec: &AnsatzSpec) -> (Vec<(f64, f64)>, f64) {
    let ((t_lo, t_hi, s_lo, s_hi), h) = spec.fd_box();
    let pts = r2_sequence(FD_SAMPLES)
        .into_iter()
        .map(|(a, b)| {
            let t = (t_lo.ln() + (t_hi.ln() - t_lo.ln()) * a).exp();
            (t, spec.fd_z(t, s_lo + (s_hi - s_lo) * b))
        })
        .collect();
    (pts, h)
}

fn max_mismatch(samples: &[FdSample]) -> f64 {
    samples.iter().map(|s| s.mismatch).fold(0.0, f64::max)
}

fn attach_fd(rep: &mut VerificationReport, spec: &AnsatzSpec) -> Result<()> {
    let (pts, h) = default_fd_samples(spec);
    let fd = validate_closed_form(spec, &pts, h)?;
    let mm = max_mismatch(&fd);
    rep.closed_form_mismatch = Some(mm);
    rep.require(mm <= MISMATCH_TOL, format!("closed form disagrees with finite differences by {mm:.3e}"));
    Ok(())
}

fn new_report(name: &str, spec: &AnsatzSpec, claim: Claim, domain: &SampleDomain) -> VerificationReport {
    let mut rep = VerificationReport::new(name, claim);
    for (n, v) in spec.parameters() {
        rep = rep.param(n, v);
    }
    rep.domain = *domain;
    rep
}

/// Tracks the extreme of a residual in the claim's violating direction.
struct Worst {
    claim: Claim,
    value: f64,
    at: (f64, f64),
    range: (f64, f64),
}

impl Worst {
    fn new(claim: Claim) -> Self {
        let value = match claim {
            Claim::NonNegative => f64::INFINITY,
            _ => f64::NEG_INFINITY,
        };
        Self { claim, value, at: (f64::NAN, f64::NAN), range: (f64::INFINITY, f64::NEG_INFINITY) }
    }

    fn push(&mut self, res: f64, t: f64, z: f64) {
        self.range = (self.range.0.min(res), self.range.1.max(res));
        let key = match self.claim {
            Claim::NonNegative => -res,
            Claim::Vanishing => res.abs(),
            _ => res,
        };
        let cur = match self.claim {
            Claim::NonNegative => -self.value,
            Claim::Vanishing => self.value.abs(),
            _ => self.value,
        };
        if key > cur || self.at.0.is_nan() || res.is_nan() {
            self.value = res;
            self.at = (t, z);
        }
    }

    fn finish(self, rep: &mut VerificationReport) {
        rep.worst_signed_residual = self.value;
        rep.worst_at = self.at;
        rep.observed = Some(self.range);
        rep.verdict = Verdict::from_bool(self.value.is_finite() && self.claim.holds_for(self.value));
    }
}

/// Default psi domain: `t ∈ [t0, 10⁶]` (60 points), `z/√t ∈ [0, 50]` (200 points).
pub fn default_psi_domain(spec: &AnsatzSpec) -> SampleDomain {
    let t0 = spec.parameters().iter().find(|p| p.0 == "t0").map(|p| p.1).unwrap_or(1.0);
    SampleDomain { t_range: (t0, 1e6), z_range: (0.0, Y_MAX), n_t: 60, n_z: 200 }
}

/// Finite-difference check of the linear identity
/// `(∂t - ∂xx - 1) ψ(t, x - 2t + r' ln t) = r' e^{-z} t^{-(1+r-r')} w'(z/√t)`.
pub fn check_linear_residual_identity(r: f64, r_prime: f64, samples: &[(f64, f64)]) -> Result<VerificationReport> {
    if samples.iter().any(|&(t, z)| !(t >= 2.0) || !(z >= 0.0)) {
        return Err(Error::InvalidSpec("identity samples need t >= 2 and z >= 0".into()));
    }
    let spec = AnsatzSpec::PsiSuper { r, r_prime, m: 0.0, delta: 0.0, t0: 1.0 };
    let fd = validate_closed_form(&spec, samples, PSI_FD_STEP)?;
    let mut rep = VerificationReport::new("linear_residual_identity", Claim::Agrees).param("r", r).param("r_prime", r_prime);
    let mm = max_mismatch(&fd);
    let worst = fd.iter().max_by(|a, b| a.mismatch.total_cmp(&b.mismatch));
    if let Some(w) = worst {
        rep.worst_at = (w.t, w.z);
    }
    let rel_fd = fd.iter().map(|s| s.finite_difference.abs() / s.value.abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    let spread = fd.iter().map(|s| s.step_change / s.value.abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    rep.worst_signed_residual = mm;
    rep.closed_form_mismatch = Some(mm);
    rep.observed = Some((0.0, rel_fd));
    rep.notes.push(format!("largest |FD residual|/|u| {rel_fd:.3e}; largest step change/|u| {spread:.3e}"));
    rep.domain = SampleDomain {
        t_range: samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, s| (a.0.min(s.0), a.1.max(s.0))),
        z_range: samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, s| (a.0.min(s.1), a.1.max(s.1))),
        n_t: samples.len(),
        n_z: 1,
    };
    rep.verdict = Verdict::from_bool(rep.claim.holds_for(mm));
    Ok(rep)
}

/// Bracket `(1 - M/√t) r' w' + (M/2) w >= 0` on the psi grid.
pub fn check_supersolution(spec: &AnsatzSpec, domain: &SampleDomain) -> Result<VerificationReport> {
    let AnsatzSpec::PsiSuper { r, r_prime, m, t0, .. } = *spec else {
        return Err(Error::InvalidSpec(format!("check_supersolution needs psi_super, got {}", spec.kind().name())));
    };
    check_domain(domain)?;
    let mut rep = new_report("psi_super", spec, Claim::NonNegative, domain);
    let mut worst = Worst::new(Claim::NonNegative);
    for t in time_grid(domain.t_range, domain.n_t) {
        for y in similarity_grid(domain.z_range, domain.n_z) {
            let (w, wp) = w_pair(r, y)?;
            worst.push((1.0 - m / t.sqrt()) * r_prime * wp + 0.5 * m * w, t, y);
        }
    }
    worst.finish(&mut rep);
    rep.require(domain.t_range.0 >= t0 * (1.0 - 1e-12), format!("t range starts below t0 = {t0}"));
    rep.require(1.0 - m / t0.sqrt() >= 0.5 - 1e-12, "1 - M/sqrt(t0) < 1/2");
    attach_fd(&mut rep, spec)?;
    Ok(rep)
}

/// Braced expression of the ψ sub-solution `<= 0` on the psi grid.
pub fn check_subsolution(spec: &AnsatzSpec, domain: &SampleDomain) -> Result<VerificationReport> {
    let AnsatzSpec::PsiSub { r, r_prime, m, epsilon, epsilon_bound, delta, t0 } = *spec else {
        return Err(Error::InvalidSpec(format!("check_subsolution needs psi_sub, got {}", spec.kind().name())));
    };
    check_domain(domain)?;
    let mut rep = new_report("psi_sub", spec, Claim::NonPositive, domain);
    let mut worst = Worst::new(Claim::NonPositive);
    let mut worst_inner = f64::NEG_INFINITY;
    for t in time_grid(domain.t_range, domain.n_t) {
        let q = 1.0 + m / t.sqrt();
        let st = t.sqrt();
        for y in similarity_grid(domain.z_range, domain.n_z) {
            let (w, wp) = w_pair(r, y)?;
            let z = y * st;
            let braced = -0.5 * m * w + q * (r_prime * wp + q * epsilon * (-z).exp() * w * w);
            if y <= delta {
                worst_inner = worst_inner.max(braced);
            }
            worst.push(braced, t, y);
        }
    }
    worst.finish(&mut rep);
    rep.notes.push(format!("largest braced value in the zone z <= delta sqrt(t): {worst_inner:.6e}"));
    rep.require(
        epsilon < epsilon_bound,
        format!(
            "epsilon = {epsilon:.6e} violates the bound {epsilon_bound:.6e} required in the zone z <= delta sqrt(t) (delta = {delta})"
        ),
    );
    rep.require(domain.t_range.0 >= t0 * (1.0 - 1e-12), format!("t range starts below t0 = {t0}"));
    rep.require(1.0 + m / t0.sqrt() <= 2.0 + 1e-12, "1 + M/sqrt(t0) > 2");
    attach_fd(&mut rep, spec)?;
    Ok(rep)
}

/// Claimed sign of the shifted-wave residual for a tail exponent `k`.
pub fn tw_shift_claim(k: f64) -> Claim {
    if k > 1.0 {
        Claim::NonNegative
    } else if k < 1.0 {
        Claim::NonPositive
    } else {
        Claim::Vanishing
    }
}

/// Residual `(r/(t+t0)) U'(z)` of the shifted minimal wave.
pub fn check_tw_shift(k: f64, t0: f64, domain: &SampleDomain) -> Result<VerificationReport> {
    check_domain(domain)?;
    let spec = AnsatzSpec::tw_shift(k, t0)?;
    let AnsatzSpec::TwShift { r, ref wave, .. } = spec else { unreachable!() };
    let claim = tw_shift_claim(k);
    let mut rep = new_report("tw_shift", &spec, claim, domain);
    let mut worst = Worst::new(claim);
    let zs = uniform(domain.z_range.0, domain.z_range.1, domain.n_z);
    for t in time_grid(domain.t_range, domain.n_t) {
        for &z in &zs {
            worst.push(r / (t + t0) * wave.eval_prime(z), t, z);
        }
    }
    worst.finish(&mut rep);
    attach_fd(&mut rep, &spec)?;
    Ok(rep)
}

/// Advance-case sub-solution on `0 < z <= 2√t`.
pub fn check_phi_eta_sub(r: f64, domain: &SampleDomain) -> Result<VerificationReport> {
    check_domain(domain)?;
    if domain.z_range.1 > 2.0 || domain.z_range.0 < 0.0 {
        return Err(Error::InvalidSpec(format!(
            "phi_eta samples must satisfy 0 < z/sqrt(t) <= 2, got [{}, {}]",
            domain.z_range.0, domain.z_range.1
        )));
    }
    if !(domain.t_range.0 > 0.0) {
        return Err(Error::InvalidSpec("phi_eta check needs t > 0".into()));
    }
    let spec = AnsatzSpec::phi_eta_sub(r)?;
    let AnsatzSpec::PhiEtaSub { eta, gamma, .. } = spec else { unreachable!() };
    let mut rep = new_report("phi_eta_sub", &spec, Claim::NonPositive, domain);
    let mut worst = Worst::new(Claim::NonPositive);
    let mut worst_bound = f64::NEG_INFINITY;
    let mut worst_gap = f64::NEG_INFINITY;
    let ss: Vec<f64> = uniform(domain.z_range.0, domain.z_range.1, domain.n_z).into_iter().filter(|&s| s > 0.0).collect();
    for t in time_grid(domain.t_range, domain.n_t) {
        for &s in &ss {
            let z = s * t.sqrt();
            let (full, bound) = spec.phi_expression(t, z)?;
            worst.push(full, t, s);
            worst_bound = worst_bound.max(bound);
            worst_gap = worst_gap.max(full - bound);
        }
    }
    worst.finish(&mut rep);
    rep.notes.push(format!("largest bound value {worst_bound:.6e}; largest excess of the residual over the bound {worst_gap:.3e}"));
    rep.require(worst_bound <= SIGN_SLACK, format!("bound expression reaches {worst_bound:.6e}"));
    rep.require(worst_gap <= SIGN_SLACK, format!("residual exceeds its bound by {worst_gap:.3e}"));
    // right derivative at the gluing point: (η/√t) φ(0) + φ'(0) = η / (2γ√t)
    let glue = eta / (2.0 * gamma * domain.t_range.1.sqrt());
    rep.require(glue > 0.0, "gluing slope is not positive");
    rep.notes.push(format!("gluing slope at t = {:.3e}: {glue:.6e}", domain.t_range.1));
    attach_fd(&mut rep, &spec)?;
    Ok(rep)
}

/// Bracket `e^{-z} v(t, z) (t+1)^{5/4} - M/4 <= 0` of the critical sub-solution.
pub fn check_critical_sub(spec: &AnsatzSpec, domain: &SampleDomain) -> Result<VerificationReport> {
    let AnsatzSpec::DirichletSub { m, delta, .. } = *spec else {
        return Err(Error::InvalidSpec(format!("check_critical_sub needs dirichlet_sub, got {}", spec.kind().name())));
    };
    check_domain(domain)?;
    let mut rep = new_report("dirichlet_sub", spec, Claim::NonPositive, domain);
    let mut worst = Worst::new(Claim::NonPositive);
    let mut worst_exact = f64::NEG_INFINITY;
    let zs = uniform(domain.z_range.0.max(0.0), domain.z_range.1, domain.n_z);
    for t in time_grid(domain.t_range, domain.n_t) {
        let w = (t + 1.0).powf(1.25);
        let mt = 1.0 + m * (t + 1.0).powf(-0.25);
        for &z in &zs {
            let q = (-z).exp() * v_dirichlet(t, z, 1e-10)?.value * w;
            worst.push(q - 0.25 * m, t, z);
            worst_exact = worst_exact.max(delta * mt * mt * q - 0.25 * m);
        }
    }
    worst.finish(&mut rep);
    rep.notes.push(format!("largest exact scaled residual {worst_exact:.6e}"));
    rep.require(delta * (1.0 + m).powi(2) < 1.0, "delta (1 + M)^2 >= 1");
    attach_fd(&mut rep, spec)?;
    Ok(rep)
}

/// Normalized residual
/// `(3/2 - 1/ln t) t^{1/4} ∂x v / v + (M/4)(1 - M t^{-1/4})^{-1} >= 0`
/// of the critical super-solution.
pub fn check_critical_super(spec: &AnsatzSpec, domain: &SampleDomain) -> Result<VerificationReport> {
    let AnsatzSpec::DirichletSuper { m, t0, .. } = *spec else {
        return Err(Error::InvalidSpec(format!("check_critical_super needs dirichlet_super, got {}", spec.kind().name())));
    };
    check_domain(domain)?;
    if !(domain.z_range.0 > 0.0) {
        return Err(Error::InvalidSpec("critical super samples need z > 0".into()));
    }
    let mut rep = new_report("dirichlet_super", spec, Claim::NonNegative, domain);
    let mut worst = Worst::new(Claim::NonNegative);
    for t in time_grid(domain.t_range, domain.n_t) {
        let q = t.powf(0.25);
        let mt = 1.0 - m / q;
        let a = 1.5 - 1.0 / t.ln();
        for s in geometric(domain.z_range.0, domain.z_range.1, domain.n_z) {
            let z = s * t.powf(0.75);
            let v = v_dirichlet(t, z, 1e-10)?.value;
            let vx = v_dirichlet_dx(t, z, 1e-10)?.value;
            worst.push(a * q * vx / v + 0.25 * m / mt, t, s);
        }
    }
    worst.finish(&mut rep);
    rep.require(domain.t_range.0 >= t0 * (1.0 - 1e-12), format!("t range starts below t0 = {t0}"));
    rep.require(domain.t_range.0.powf(0.25) > m, "t^{1/4} <= M at the start of the t range");
    attach_fd(&mut rep, spec)?;
    Ok(rep)
}

/// Runs the check matching the spec's kind.
pub fn check(spec: &AnsatzSpec, domain: &SampleDomain) -> Result<VerificationReport> {
    match spec {
        AnsatzSpec::PsiSuper { .. } => check_supersolution(spec, domain),
        AnsatzSpec::PsiSub { .. } => check_subsolution(spec, domain),
        AnsatzSpec::TwShift { k, t0, .. } => check_tw_shift(*k, *t0, domain),
        AnsatzSpec::PhiEtaSub { r, .. } => check_phi_eta_sub(*r, domain),
        AnsatzSpec::DirichletSub { .. } => check_critical_sub(spec, domain),
        AnsatzSpec::DirichletSuper { .. } => check_critical_super(spec, domain),
    }
}

/// `ln K` for the smallest `K` with `K û(t0, x) >= A x^k e^{-x}` over
/// `x ∈ [2t0 - r ln t0 + 1, x_max]` (step 0.01), `k = 1 - 2r`; infinite once
/// `û` underflows. Bounded in `x_max` for `r < 3/2`, unbounded at `r = 3/2`.
pub fn initial_domination_log_constant(r: f64, m: f64, t0: f64, amplitude: f64, x_max: f64) -> Result<f64> {
    let r_prime = r.max(0.0);
    let k = 1.0 - 2.0 * r;
    if !(1.0 - m / t0.sqrt() > 0.0) {
        return Err(Error::InvalidSpec(format!("1 - M/sqrt(t0) must be positive, got M = {m}, t0 = {t0}")));
    }
    let x_lo = 2.0 * t0 - r * t0.ln() + 1.0;
    let n = ((x_max - x_lo) / 1e-2).ceil().max(1.0) as usize;
    let mut best = f64::NEG_INFINITY;
    for j in 0..=n {
        let x = x_lo + (x_max - x_lo) * j as f64 / n as f64;
        let z = x - 2.0 * t0 + r_prime * t0.ln();
        let w = w_eval(r, z / t0.sqrt())?;
        if !(w > 0.0) {
            return Ok(f64::INFINITY);
        }
        let ln_hat = (1.0 - m / t0.sqrt()).ln() - z + (0.5 + r_prime - r) * t0.ln() + w.ln();
        let ln_u0 = amplitude.ln() + k * x.ln() - x;
        best = best.max(ln_u0 - ln_hat);
    }
    Ok(best)
}
