//! Kernel quadratures for the two linear problems behind the front estimates:
//!
//! * the half-line Dirichlet heat problem `v_t = v_xx`, `v(t, 0) = 0`, with
//!   data `v0 = 1` on `(0, 1]` and `1/y^2` beyond, through the image kernel;
//! * the whole-line problem `v_t = v_xx + v` from front-like data, evaluated
//!   in the scaling `v = e^{ln_scale} · I` so that values far beyond the
//!   double range are still available as logarithms.
//!
//! Tolerances are relative to the computed value.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureResult, Tolerance};
use crate::report::{Claim, SampleDomain, Verdict, VerificationReport};

pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_EVALS: usize = 4_000_000;
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Gaussian truncation radius `10 + 4√(t ln(1/tol))` around the kernel peak.
pub fn truncation_radius(t: f64, tol: f64) -> f64 {
    10.0 + 4.0 * (t * (1.0 / tol).ln()).sqrt()
}

/// Initial data of the Dirichlet problem.
pub fn dirichlet_data(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y <= 1.0 {
        1.0
    } else {
        1.0 / (y * y)
    }
}

fn check_tx(t: f64, x: f64, tol: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("x must be >= 0, got {x}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    Ok(())
}

/// Panel boundaries for a gaussian of width `√t` centred at `x` on `y >= 0`,
/// with data kinks and geometric points resolving the `1/y` scale near 0.
fn dirichlet_points(t: f64, x: f64, tol: f64, kinks: &[f64]) -> Vec<f64> {
    let r = truncation_radius(t, tol);
    let lo = (x - r).max(0.0);
    let hi = x + r;
    let s = t.sqrt();
    let mut pts = vec![lo, hi];
    let mut push = |p: f64| {
        if p > lo && p < hi {
            pts.push(p);
        }
    };
    for &k in kinks {
        push(k);
    }
    let mut c = 1.0;
    while c * s < r {
        push(x - c * s);
        push(x + c * s);
        c *= 3.0;
    }
    let mut g = 4.0;
    while g < hi.min(x + s) {
        push(g);
        g *= 4.0;
    }
    pts
}

/// Half-line Dirichlet solution from bounded data supported in `(0, ∞)`.
pub fn v_dirichlet_with(t: f64, x: f64, data: impl Fn(f64) -> f64, kinks: &[f64], tol: f64) -> Result<QuadratureResult> {
    check_tx(t, x, tol)?;
    if x == 0.0 {
        return Ok(QuadratureResult { value: 0.0, abs_error_estimate: 0.0, evaluations: 0 });
    }
    let norm = 1.0 / (2.0 * (std::f64::consts::PI * t).sqrt());
    let f = |y: f64| {
        let d = x - y;
        data(y) * (-d * d / (4.0 * t)).exp() * -(-x * y / t).exp_m1() * norm
    };
    integrate(f, &dirichlet_points(t, x, tol, kinks), Tolerance::relative(tol), MAX_EVALS)
}

pub fn v_dirichlet(t: f64, x: f64, tol: f64) -> Result<QuadratureResult> {
    v_dirichlet_with(t, x, dirichlet_data, &[1.0], tol)
}

/// `∂x v` from the differentiated image kernel.
pub fn v_dirichlet_dx(t: f64, x: f64, tol: f64) -> Result<QuadratureResult> {
    check_tx(t, x, tol)?;
    let norm = 1.0 / (2.0 * t * 2.0 * (std::f64::consts::PI * t).sqrt());
    let f = |y: f64| {
        let d = x - y;
        let e = (-x * y / t).exp_m1();
        dirichlet_data(y) * (-d * d / (4.0 * t)).exp() * (y * (2.0 + e) + x * e) * norm
    };
    let tol = Tolerance { abs: 0.0, rel: tol, rel_l1: 1e-2 * tol };
    let x_eff = x.max(1e-300);
    integrate(f, &dirichlet_points(t, x_eff, tol.rel, &[1.0]), tol, MAX_EVALS)
}

/// Same solution through `e^{-x²/4t}/√(πt) ∫ e^{-y²/4t} sinh(xy/2t) v0(y) dy`;
/// only usable while `xy/2t` stays below the `sinh` overflow.
pub fn v_dirichlet_sinh_form(t: f64, x: f64, tol: f64) -> Result<QuadratureResult> {
    check_tx(t, x, tol)?;
    let pts = dirichlet_points(t, x, tol, &[1.0]);
    let hi = pts.iter().copied().fold(0.0, f64::max);
    if x * hi / (2.0 * t) > 700.0 {
        return Err(Error::Overflow(format!("sinh form overflows at t = {t}, x = {x}")));
    }
    let pre = (-x * x / (4.0 * t)).exp() / (std::f64::consts::PI * t).sqrt();
    let f = |y: f64| (-y * y / (4.0 * t)).exp() * (x * y / (2.0 * t)).sinh() * dirichlet_data(y) * pre;
    integrate(f, &pts, Tolerance::relative(tol), MAX_EVALS)
}

/// Whole-line initial data given through `g(y) = ln u0(y) + y`, which stays
/// moderate on the exponential tail.
pub trait LineData {
    fn shifted_log(&self, y: f64) -> f64;
    fn kinks(&self) -> Vec<f64>;
    /// Power `k` of a `y^k e^{-y}` tail, used to place the integration window.
    fn tail_power(&self) -> f64 {
        0.0
    }
}

/// The front-like family of the simulations: `1` on `y <= 0`,
/// `min(1, A y^k e^{-y})` on `y >= 1`, log-linear in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontData {
    pub k: f64,
    pub amplitude: f64,
}

impl LineData for FrontData {
    fn shifted_log(&self, y: f64) -> f64 {
        let ln_a = self.amplitude.ln();
        if y <= 0.0 {
            y
        } else if y < 1.0 {
            y * (ln_a - 1.0).min(0.0) + y
        } else {
            y.min(ln_a + self.k * y.ln())
        }
    }

    fn kinks(&self) -> Vec<f64> {
        vec![0.0, 1.0]
    }

    fn tail_power(&self) -> f64 {
        self.k
    }
}

/// `u0 ≡ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitData;

impl LineData for UnitData {
    fn shifted_log(&self, y: f64) -> f64 {
        y
    }

    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// `v = e^{ln_scale} · result.value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledValue {
    pub ln_scale: f64,
    pub result: QuadratureResult,
}

impl ScaledValue {
    pub fn ln_value(&self) -> f64 {
        self.ln_scale + self.result.value.ln()
    }

    pub fn value(&self) -> f64 {
        self.ln_value().exp()
    }
}

/// Solution of `v_t = v_xx + v` on the line,
/// `v(t, x) = e^t ∫ G(t, x - y) u0(y) dy`, returned in scaled form.
///
/// With `y_c = x - 2t` the integrand is `e^{-(x-2t)} e^{Φ(y)}/√(4πt)` where
/// `Φ(y) = -(y - y_c)²/4t + g(y)`; `Φ` is computed directly so no
/// intermediate exponential overflows.
pub fn v_wholeline_scaled<D: LineData>(t: f64, x: f64, data: &D, tol: f64) -> Result<ScaledValue> {
    if !(t > 0.0) || !t.is_finite() || !x.is_finite() {
        return Err(Error::Domain(format!("whole-line solution needs t > 0 and finite x, got ({t}, {x})")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    let yc = x - 2.0 * t;
    let s = t.sqrt();
    let r = truncation_radius(t, tol);
    let k = data.tail_power();
    let tail_peak = if k > 0.0 { 0.5 * yc + (0.25 * yc * yc + 2.0 * k * t).sqrt() } else { yc };
    let phi = |y: f64| {
        let d = y - yc;
        -d * d / (4.0 * t) + data.shifted_log(y)
    };
    let y_lo = x.min(0.0).min(yc) - r - 40.0;
    let y_hi = yc.max(1.0).max(tail_peak).max(x) + r;
    let mut pts = vec![y_lo, y_hi];
    let mut candidates = vec![yc, x, 0.0, 1.0, tail_peak];
    // geometric offsets around each possible peak, so that no single panel
    // spans many kernel widths next to the mass
    let mut c = 1.0;
    while c * s < y_hi - y_lo {
        for centre in [yc, x, 0.0, tail_peak] {
            candidates.push(centre - c * s);
            candidates.push(centre + c * s);
        }
        c *= 3.0;
    }
    candidates.extend(data.kinks());
    for &p in &candidates {
        if p > y_lo && p < y_hi {
            pts.push(p);
        }
    }
    let n_scan = 400;
    let phi_max = (0..=n_scan)
        .map(|j| y_lo + (y_hi - y_lo) * j as f64 / n_scan as f64)
        .chain(pts.iter().copied())
        .map(phi)
        .fold(f64::NEG_INFINITY, f64::max);
    let norm = 1.0 / (2.0 * (std::f64::consts::PI * t).sqrt());
    let f = |y: f64| (phi(y) - phi_max).exp() * norm;
    let result = integrate(f, &pts, Tolerance::relative(tol), MAX_EVALS)?;
    Ok(ScaledValue { ln_scale: -yc + phi_max, result })
}

pub fn v_wholeline_kpp_scaled(t: f64, x: f64, k: f64, amplitude: f64, tol: f64) -> Result<ScaledValue> {
    v_wholeline_scaled(t, x, &FrontData { k, amplitude }, tol)
}

/// Unscaled whole-line value; overflow is an error, underflow returns 0.
pub fn v_wholeline_kpp(t: f64, x: f64, k: f64, amplitude: f64, tol: f64) -> Result<QuadratureResult> {
    let sv = v_wholeline_kpp_scaled(t, x, k, amplitude, tol)?;
    let ln_v = sv.ln_value();
    if ln_v > 709.78 {
        return Err(Error::Overflow(format!("v({t}, {x}) = e^{ln_v:.3} exceeds f64 range")));
    }
    let scale = sv.ln_scale.exp();
    let value = sv.value();
    Ok(QuadratureResult {
        value,
        abs_error_estimate: sv.result.abs_error_estimate * scale,
        evaluations: sv.result.evaluations,
    })
}

/// `A/√π ∫_{-c/2}^∞ (2z + c)^k e^{-z²} dz`, the limit of
/// `v(t, 2t + c√t) / (t^{k/2} e^{-c√t})`.
pub fn wholeline_limit_constant(k: f64, amplitude: f64, c: f64) -> Result<f64> {
    let lo = -0.5 * c;
    let f = |z: f64| {
        let b = 2.0 * z + c;
        if b <= 0.0 {
            0.0
        } else {
            b.powf(k) * (-z * z).exp()
        }
    };
    let hi = lo.max(0.0) + 40.0;
    let r = integrate(f, &[lo, 0.0f64.max(lo), hi], Tolerance::relative(1e-13), MAX_EVALS)?;
    Ok(amplitude / SQRT_PI * r.value)
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|j| (a + (b - a) * j as f64 / (n - 1) as f64).exp()).collect()
}

/// Limit of `v(t, x) t^{3/2} / (x ln t)` for fixed `x` as `t → ∞`.
pub const POSTPONED_LIMIT: f64 = 1.0 / (4.0 * SQRT_PI);
pub const POSTPONED_BAND: (f64, f64) = (0.05, 5.0);

/// Smallest and largest `v(t, x) t^{3/2}/(x ln t)` over `n_x` points of `(1, ln t)`.
pub fn postponed_band(t: f64, n_x: usize, tol: f64) -> Result<(f64, f64, f64, f64)> {
    let lt = t.ln();
    let n_x = n_x.max(2);
    let mut lo = (f64::INFINITY, 0.0);
    let mut hi = (f64::NEG_INFINITY, 0.0);
    for j in 0..n_x {
        let x = 1.0 + 1e-9 + (lt - 1.0 - 2e-9) * j as f64 / (n_x - 1) as f64;
        let ratio = v_dirichlet(t, x, tol)?.value * t.powf(1.5) / (x * lt);
        if ratio < lo.0 {
            lo = (ratio, x);
        }
        if ratio > hi.0 {
            hi = (ratio, x);
        }
    }
    Ok((lo.0, lo.1, hi.0, hi.1))
}

/// Two-sided boundedness of `v t^{3/2}/(x ln t)` on `(1, ln t)`.
pub fn verify_postponed_bounds(t_values: &[f64], n_x: usize, tol: f64) -> Result<VerificationReport> {
    if t_values.iter().any(|&t| !(t >= 100.0)) {
        return Err(Error::Domain("postponed bounds need t >= 100".into()));
    }
    let mut rep = VerificationReport::new("postponed_bounds", Claim::Band)
        .param("band_lo", POSTPONED_BAND.0)
        .param("band_hi", POSTPONED_BAND.1);
    let mut worst = f64::INFINITY;
    let mut obs = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in t_values {
        let (lo, xlo, hi, xhi) = postponed_band(t, n_x, tol)?;
        let margin_lo = lo - POSTPONED_BAND.0;
        let margin_hi = POSTPONED_BAND.1 - hi;
        if margin_lo < worst {
            worst = margin_lo;
            rep.worst_at = (t, xlo);
        }
        if margin_hi < worst {
            worst = margin_hi;
            rep.worst_at = (t, xhi);
        }
        obs = (obs.0.min(lo), obs.1.max(hi));
        rep.notes.push(format!("t = {t:.3e}: ratio in [{lo:.6}, {hi:.6}]"));
    }
    rep.notes.push(format!("large-t limit 1/(4 sqrt(pi)) = {POSTPONED_LIMIT:.6}"));
    rep.worst_signed_residual = worst;
    rep.observed = Some(obs);
    rep.domain = SampleDomain {
        t_range: (t_values[0], *t_values.last().unwrap()),
        z_range: (1.0, t_values.last().unwrap().ln()),
        n_t: t_values.len(),
        n_z: n_x,
    };
    rep.verdict = Verdict::from_bool(rep.claim.holds_for(worst));
    Ok(rep)
}

/// Running supremum of `sup_x e^{-x} v(t, x) (t+1)^{3/2-ε}` over increasing `t`.
pub fn verify_lemma52(eps: f64, t_samples: &[f64], x_samples: &[f64], tol: f64) -> Result<VerificationReport> {
    if !(0.0..=0.5).contains(&eps) {
        return Err(Error::Domain(format!("exponent slack must lie in [0, 1/2], got {eps}")));
    }
    let mut rep = VerificationReport::new("weighted_sup", Claim::Stabilizes).param("epsilon", eps);
    let mut running = 0.0f64;
    let mut history = Vec::with_capacity(t_samples.len());
    let mut ts: Vec<f64> = t_samples.to_vec();
    ts.sort_by(f64::total_cmp);
    for &t in &ts {
        let w = (t + 1.0).powf(1.5 - eps);
        let mut s = 0.0f64;
        for &x in x_samples {
            let v = v_dirichlet(t, x, tol)?.value;
            let q = (-x).exp() * v * w;
            if q > s {
                s = q;
            }
            if q >= running {
                rep.worst_at = (t, x);
            }
        }
        running = running.max(s);
        history.push((t, running));
    }
    let t_last = *ts.last().unwrap();
    let anchor = t_last / 100.0;
    let before = history
        .iter()
        .rfind(|p| p.0 <= anchor * (1.0 + 1e-12))
        .map(|p| p.1)
        .unwrap_or(history[0].1);
    let growth = running / before - 1.0;
    rep.worst_signed_residual = growth;
    rep.observed = Some((history[0].1, running));
    rep.notes.push(format!("running sup {before:.6e} at t <= {anchor:.3e}, {running:.6e} at t = {t_last:.3e}"));
    rep.domain = SampleDomain {
        t_range: (ts[0], t_last),
        z_range: (x_samples[0], *x_samples.last().unwrap()),
        n_t: ts.len(),
        n_z: x_samples.len(),
    };
    rep.verdict = Verdict::from_bool(rep.claim.holds_for(growth));
    Ok(rep)
}

/// Empirical constant of `∂x v / v >= -C t^{-1/4}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBound {
    pub c_hat: f64,
    /// `(t, max_x -t^{1/4} ∂x v / v)`.
    pub per_t: Vec<(f64, f64)>,
    pub report: VerificationReport,
}

/// Sample points `x ∈ (0, 4 t^{3/4}]` for the gradient bound, log-spaced.
pub fn gradient_x_samples(t: f64, n_x: usize) -> Vec<f64> {
    log_space(1e-3, 4.0 * t.powf(0.75), n_x)
}

pub fn verify_gradient_bound(t_samples: &[f64], n_x: usize, tol: f64) -> Result<GradientBound> {
    let mut rep = VerificationReport::new("gradient_bound", Claim::Bounded);
    let mut per_t = Vec::with_capacity(t_samples.len());
    let mut c_hat = 0.0f64;
    let mut ts: Vec<f64> = t_samples.to_vec();
    ts.sort_by(f64::total_cmp);
    for &t in &ts {
        let q = t.powf(0.25);
        let mut c_t = 0.0f64;
        for x in gradient_x_samples(t, n_x) {
            let v = v_dirichlet(t, x, tol)?.value;
            let dv = v_dirichlet_dx(t, x, tol)?.value;
            let c = -dv / v * q;
            if c > c_t {
                c_t = c;
            }
            if c > c_hat {
                c_hat = c;
                rep.worst_at = (t, x);
            }
        }
        per_t.push((t, c_t));
    }
    let t_last = *ts.last().unwrap();
    let split = t_last / 100.0;
    let early = per_t.iter().filter(|p| p.0 < split).map(|p| p.1).fold(0.0, f64::max);
    let late = per_t.iter().filter(|p| p.0 >= split).map(|p| p.1).fold(0.0, f64::max);
    let growth = if early > 0.0 { late / early - 1.0 } else { f64::INFINITY };
    rep = rep.param("c_hat", c_hat);
    rep.worst_signed_residual = growth;
    rep.observed = Some((per_t.iter().map(|p| p.1).fold(f64::INFINITY, f64::min), c_hat));
    rep.notes.push(format!("max C(t) over t < {split:.3e}: {early:.6}; over the last two decades: {late:.6}"));
    rep.domain = SampleDomain { t_range: (ts[0], t_last), z_range: (1e-3, 4.0 * t_last.powf(0.75)), n_t: ts.len(), n_z: n_x };
    rep.verdict = Verdict::from_bool(c_hat.is_finite() && rep.claim.holds_for(growth));
    Ok(GradientBound { c_hat, per_t, report: rep })
}
