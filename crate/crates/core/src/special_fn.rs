//! Gamma, Kummer's confluent hypergeometric function `M(a, b, z) = 1F1(a; b; z)`
//! for `z >= 0`, and the self-similar profile
//! `w(y; r) = y e^{-y^2/4} M((3 - 2r)/2, 3/2, y^2/4)`.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::rk4::rk4_trajectory;

/// Below this argument `M` is summed as a power series, above it the
/// large-`z` expansion is used.
pub const KUMMER_CROSSOVER: f64 = 30.0;
/// Width of the window above the crossover where both regimes are accurate.
pub const KUMMER_OVERLAP: f64 = 10.0;

const MAX_SERIES_TERMS: usize = 20_000;
/// Largest `z` with `e^z` finite.
const LN_MAX: f64 = 709.782_712_893_384;

pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::gamma(x))
}

fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

fn non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

fn check_args(b: f64, z: f64) -> Result<()> {
    if non_positive_integer(b) {
        return Err(Error::Domain(format!("1F1 undefined for b = {b}")));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("1F1 evaluated only for finite z >= 0, got {z}")));
    }
    Ok(())
}

/// `e^{-z} M(a, b, z)` by direct summation of the power series.
pub fn kummer_series_scaled(a: f64, b: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..MAX_SERIES_TERMS {
        let nf = n as f64;
        term *= (a + nf) / (b + nf) * z / (nf + 1.0);
        sum += term;
        if term == 0.0 || (nf > z && term.abs() <= 1e-17 * sum.abs()) {
            break;
        }
    }
    sum * (-z).exp()
}

/// `Γ(b)/Γ(a)` for positive `a`, `b`, robust against overflow of either factor.
fn gamma_ratio(b: f64, a: f64) -> f64 {
    if a < 150.0 && b < 150.0 {
        statrs::function::gamma::gamma(b) / statrs::function::gamma::gamma(a)
    } else {
        (ln_gamma(b) - ln_gamma(a)).exp()
    }
}

/// `e^{-z} M(a, b, z)` from `Γ(b)/Γ(a) z^{a-b} Σ (b-a)_n (1-a)_n / (n! z^n)`,
/// summed up to the smallest term. Accurate for `a, b > 0` and `z` well above
/// `|(b - a)(1 - a)|`.
pub fn kummer_asymptotic_scaled(a: f64, b: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut last = 1.0;
    for n in 0..200 {
        let m = n as f64;
        term *= (b - a + m) * (1.0 - a + m) / ((m + 1.0) * z);
        if term.abs() > last && n > 1 {
            break;
        }
        sum += term;
        last = term.abs();
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    gamma_ratio(b, a) * z.powf(a - b) * sum
}

/// `e^{-z} M(a, b, z)`; stays finite where `M` itself overflows.
pub fn kummer_1f1_scaled(a: f64, b: f64, z: f64) -> Result<f64> {
    check_args(b, z)?;
    if z < KUMMER_CROSSOVER || non_positive_integer(a) || a <= 0.0 || b <= 0.0 {
        Ok(kummer_series_scaled(a, b, z))
    } else {
        Ok(kummer_asymptotic_scaled(a, b, z))
    }
}

pub fn kummer_1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    let scaled = kummer_1f1_scaled(a, b, z)?;
    if scaled == 0.0 {
        return Ok(0.0);
    }
    if z + scaled.abs().ln() > LN_MAX {
        return Err(Error::Overflow(format!("1F1({a}, {b}, {z}) exceeds f64 range")));
    }
    Ok(scaled * z.exp())
}

/// `dM/dz = (a/b) M(a+1, b+1, z)`.
pub fn kummer_1f1_prime(a: f64, b: f64, z: f64) -> Result<f64> {
    check_args(b, z)?;
    Ok(a / b * kummer_1f1(a + 1.0, b + 1.0, z)?)
}

/// Closed-form case `r = 3/2` of the self-similar profile.
fn is_gaussian_regime(r: f64) -> bool {
    r == 1.5
}

fn check_profile_args(r: f64, y: f64) -> Result<()> {
    if !(r <= 1.5) {
        return Err(Error::Domain(format!("self-similar profile requires r <= 3/2, got {r}")));
    }
    if !(y >= 0.0) {
        return Err(Error::Domain(format!("self-similar profile requires y >= 0, got {y}")));
    }
    Ok(())
}

/// `w(y; r)`, the solution of `w'' + (y/2) w' + (r - 1/2) w = 0`, `w(0) = 0`, `w'(0) = 1`.
pub fn w_eval(r: f64, y: f64) -> Result<f64> {
    check_profile_args(r, y)?;
    if y == 0.0 {
        return Ok(0.0);
    }
    let z = 0.25 * y * y;
    if is_gaussian_regime(r) {
        return Ok(y * (-z).exp());
    }
    let a = 1.5 - r;
    Ok(y * kummer_1f1_scaled(a, 1.5, z)?)
}

/// `w'(y; r)`.
///
/// Below the crossover this is `e^{-z}[M + 2z(M' - M)]` with `z = y^2/4`; above it
/// the two large-`z` expansions are merged term by term, which avoids the
/// cancellation between `M'` and `M`.
pub fn w_prime_eval(r: f64, y: f64) -> Result<f64> {
    check_profile_args(r, y)?;
    let z = 0.25 * y * y;
    if is_gaussian_regime(r) {
        return Ok((1.0 - 2.0 * z) * (-z).exp());
    }
    if y == 0.0 {
        return Ok(1.0);
    }
    let a = 1.5 - r;
    let b = 1.5;
    if z < KUMMER_CROSSOVER || a <= 0.0 {
        let m = kummer_series_scaled(a, b, z);
        let mp = a / b * kummer_series_scaled(a + 1.0, b + 1.0, z);
        return Ok(m + 2.0 * z * (mp - m));
    }
    Ok(w_prime_asymptotic(r, z))
}

/// Large-`z` expansion of `w'`: `Γ(b)/Γ(a) z^{-r} Σ (r)_n (1-a)_n (k - 2n) / (n! z^n)`.
fn w_prime_asymptotic(r: f64, z: f64) -> f64 {
    let a = 1.5 - r;
    let k = 1.0 - 2.0 * r;
    // Pochhammer part carried separately from the (k - 2n) weight.
    let mut poch = 1.0;
    let mut sum = k;
    let mut last = k.abs();
    for n in 1..200 {
        let m = (n - 1) as f64;
        poch *= (r + m) * (1.0 - a + m) / ((m + 1.0) * z);
        let t = poch * (k - 2.0 * n as f64);
        if t.abs() > last && n > 2 && last > 0.0 {
            break;
        }
        sum += t;
        last = t.abs();
        if t == 0.0 || t.abs() <= 1e-17 * sum.abs().max(poch.abs()) {
            break;
        }
    }
    gamma_ratio(1.5, a) * z.powf(-r) * sum
}

/// `C = 4^r Γ(3/2)/Γ((3 - 2r)/2)` in `w(y) ~ C y^k`, `k = 1 - 2r`.
pub fn w_asymptotic_constant(r: f64) -> Result<f64> {
    if !(r < 1.5) {
        return Err(Error::Domain(format!(
            "w ~ C y^k only holds for r < 3/2 (gaussian decay at r = 3/2), got r = {r}"
        )));
    }
    Ok(4f64.powf(r) * gamma_ratio(1.5, 1.5 - r))
}

/// RK4 solution of the Cauchy problem for `w` on `[0, y_max]` with `n` steps.
pub fn w_ode_oracle(r: f64, y_max: f64, n: usize) -> Result<GridFunction> {
    if n < 100 {
        return Err(Error::Domain(format!("oracle needs at least 100 steps, got {n}")));
    }
    if !(y_max > 0.0) {
        return Err(Error::Domain(format!("oracle needs y_max > 0, got {y_max}")));
    }
    let h = y_max / n as f64;
    let rhs = |y: f64, s: [f64; 2]| [s[1], -0.5 * y * s[1] - (r - 0.5) * s[0]];
    let traj = rk4_trajectory(&rhs, 0.0, [0.0, 1.0], h, n);
    Ok(GridFunction::new(0.0, h, traj.into_iter().map(|s| s[0]).collect()))
}

/// The profile `w(·; r)` together with its tail data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimProfile {
    pub r: f64,
    /// Tail exponent `k = 1 - 2r`.
    pub k: f64,
    /// `C` in `w(y) ~ C y^k`; `None` in the gaussian case `r = 3/2`.
    pub c_asym: Option<f64>,
}

impl SelfSimProfile {
    pub fn new(r: f64) -> Result<Self> {
        check_profile_args(r, 0.0)?;
        let c_asym = if r < 1.5 { Some(w_asymptotic_constant(r)?) } else { None };
        Ok(Self { r, k: 1.0 - 2.0 * r, c_asym })
    }

    /// Profile for the tail exponent `k`, i.e. `r = (1 - k)/2`.
    pub fn from_tail_exponent(k: f64) -> Result<Self> {
        Self::new((1.0 - k) / 2.0)
    }

    pub fn w(&self, y: f64) -> f64 {
        w_eval(self.r, y).unwrap_or(f64::NAN)
    }

    pub fn w_prime(&self, y: f64) -> f64 {
        w_prime_eval(self.r, y).unwrap_or(f64::NAN)
    }
}
