//! Monotone profiles of `U'' + 2U' + f(U) = 0`:
//! the minimal traveling wave (`f(u) = u(1 - u)`, `U(0) = 1/2`) and the
//! profile `φ_γ` (`f(u) = u - γu^2`, `φ(0) = 1/(2γ)`, `φ'(0) = 0`).

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::rk4::{rk4_step, State};

/// Unstable eigenvalue `√2 - 1` of the linearization at `U = 1`.
pub const LEFT_EIGENVALUE: f64 = std::f64::consts::SQRT_2 - 1.0;
/// Distance `1 - U` at which the forward integration starts.
pub const START_DEFICIT: f64 = 1e-8;
/// Maximal relative spread of `U e^z / z` over the tail window.
pub const TAIL_SPREAD_TOL: f64 = 0.02;
/// Width of the window at the right end used for the tail constant.
pub const TAIL_WINDOW: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    MinimalWave,
    PhiGamma(f64),
}

impl ProfileKind {
    #[inline]
    fn reaction(self, u: f64) -> f64 {
        match self {
            ProfileKind::MinimalWave => u * (1.0 - u),
            ProfileKind::PhiGamma(g) => u - g * u * u,
        }
    }

    fn rhs(self) -> impl Fn(f64, State) -> State {
        move |_z, s| [s[1], -2.0 * s[1] - self.reaction(s[0])]
    }
}

/// Sampled profile with derivatives at every node and its tail fit.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    pub z0: f64,
    pub dz: f64,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    /// Mean of `value · e^z / z` over the last [`TAIL_WINDOW`] units.
    pub tail_constant: f64,
    /// `(max - min)/mean` of the same ratio.
    pub tail_spread: f64,
    pub kind: ProfileKind,
}

impl WaveProfile {
    /// Builds a profile from samples, deriving the tail statistics.
    pub fn from_samples(z0: f64, dz: f64, values: Vec<f64>, slopes: Vec<f64>, kind: ProfileKind) -> Self {
        let mut p = Self { z0, dz, values, slopes, tail_constant: f64::NAN, tail_spread: f64::NAN, kind };
        p.refresh_tail();
        p
    }

    fn refresh_tail(&mut self) {
        let z_hi = self.z_max();
        let ratios: Vec<f64> = (0..self.len())
            .map(|i| (self.z(i), self.values[i]))
            .filter(|&(z, u)| z >= z_hi - TAIL_WINDOW - 1e-9 && z > 0.0 && u > 0.0)
            .map(|(z, u)| u * z.exp() / z)
            .collect();
        if ratios.is_empty() {
            self.tail_constant = f64::NAN;
            self.tail_spread = f64::INFINITY;
            return;
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
        self.tail_constant = mean;
        self.tail_spread = (hi - lo) / mean;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn z(&self, i: usize) -> f64 {
        self.z0 + i as f64 * self.dz
    }

    pub fn z_max(&self) -> f64 {
        self.z(self.len() - 1)
    }

    pub fn grid(&self) -> GridFunction {
        GridFunction::new(self.z0, self.dz, self.values.clone())
    }

    /// Copy restricted to `z <= z_max`, with the tail statistics recomputed.
    pub fn truncated(&self, z_max: f64) -> Self {
        let n = (((z_max - self.z0) / self.dz).round() as usize + 1).min(self.len());
        Self::from_samples(
            self.z0,
            self.dz,
            self.values[..n].to_vec(),
            self.slopes[..n].to_vec(),
            self.kind,
        )
    }

    #[inline]
    fn second(&self, u: f64, du: f64) -> f64 {
        -2.0 * du - self.kind.reaction(u)
    }

    /// Value and derivative at `z`. Inside the grid the profile is the quintic
    /// Hermite interpolant built from values, slopes and the ODE second
    /// derivative; outside it follows the linearized asymptotics.
    pub fn eval_with_slope(&self, z: f64) -> (f64, f64) {
        let n = self.len();
        let s = (z - self.z0) / self.dz;
        if s < 0.0 {
            return match self.kind {
                ProfileKind::MinimalWave => {
                    let d = (1.0 - self.values[0]) * (LEFT_EIGENVALUE * (z - self.z0)).exp();
                    (1.0 - d, -LEFT_EIGENVALUE * d)
                }
                ProfileKind::PhiGamma(_) => (self.values[0], self.slopes[0]),
            };
        }
        if s >= (n - 1) as f64 {
            let zl = self.z_max();
            let ul = self.values[n - 1];
            if z == zl {
                return (ul, self.slopes[n - 1]);
            }
            let u = ul * (z / zl) * (-(z - zl)).exp();
            return (u, u * (1.0 / z - 1.0));
        }
        let i = s.floor() as usize;
        let t = s - i as f64;
        let h = self.dz;
        let (f0, d0) = (self.values[i], self.slopes[i]);
        let (f1, d1) = (self.values[i + 1], self.slopes[i + 1]);
        let (s0, s1) = (self.second(f0, d0), self.second(f1, d1));
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
        let value = f0 * h0 + h * d0 * h1 + h * h * s0 * h2 + f1 * h5 + h * d1 * h4 + h * h * s1 * h3;
        let g0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        let g1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        let g2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
        let g4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        let g3 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
        let slope = (f0 * g0 - f1 * g0) / h + d0 * g1 + h * s0 * g2 + d1 * g4 + h * s1 * g3;
        (value, slope)
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.eval_with_slope(z).0
    }

    pub fn eval_prime(&self, z: f64) -> f64 {
        self.eval_with_slope(z).1
    }

    /// `U'' + 2U' + f(U)` from fourth-order five-point differences of the samples,
    /// at nodes `2..len-2`.
    pub fn ode_residual(&self) -> Vec<f64> {
        let v = &self.values;
        let h = self.dz;
        (2..v.len().saturating_sub(2))
            .map(|i| {
                let d2 = (-v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1] - v[i - 2]) / (12.0 * h * h);
                let d1 = (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / (12.0 * h);
                d2 + 2.0 * d1 + self.kind.reaction(v[i])
            })
            .collect()
    }

    /// Position where the profile crosses `level`, by interpolation.
    pub fn crossing(&self, level: f64) -> Option<f64> {
        let i = self.values.windows(2).position(|w| w[0] >= level && w[1] < level)?;
        let theta = (self.values[i] - level) / (self.values[i] - self.values[i + 1]);
        Some(self.z(i) + theta * self.dz)
    }
}

/// Tail constant `B` in `U(z) ~ B z e^{-z}`, rejected when the ratio
/// `U e^z / z` still drifts by more than 2% over the window.
pub fn wave_b_constant(profile: &WaveProfile) -> Result<f64> {
    if !(profile.tail_spread <= TAIL_SPREAD_TOL) || !(profile.tail_constant > 0.0) {
        return Err(Error::NonConvergence(format!(
            "tail ratio spread {:.3}% over [{}, {}] exceeds {}%",
            100.0 * profile.tail_spread,
            profile.z_max() - TAIL_WINDOW,
            profile.z_max(),
            100.0 * TAIL_SPREAD_TOL
        )));
    }
    Ok(profile.tail_constant)
}

fn check_grid_args(dz: f64, dz_max: f64) -> Result<()> {
    if !(dz > 0.0 && dz <= dz_max) {
        return Err(Error::Domain(format!("dz must lie in (0, {dz_max}], got {dz}")));
    }
    Ok(())
}

/// Right-hand side for the deficit `d = 1 - U`: `d'' = -2d' + d(1 - d)`.
/// Integrating `d` while `U` is close to 1 keeps the start of the orbit
/// resolved to full relative precision.
fn deficit_rhs() -> impl Fn(f64, State) -> State {
    |_z, s| [s[1], -2.0 * s[1] + s[0] * (1.0 - s[0])]
}

/// Orbit stepper that integrates `d = 1 - U` until the crossing of `1/2`
/// and `U` afterwards.
#[derive(Clone, Copy)]
struct WaveStepper {
    state: State,
    in_deficit: bool,
}

impl WaveStepper {
    fn start() -> Self {
        Self { state: [START_DEFICIT, LEFT_EIGENVALUE * START_DEFICIT], in_deficit: true }
    }

    fn advance(&mut self, h: f64) {
        if self.in_deficit {
            self.state = rk4_step(&deficit_rhs(), 0.0, self.state, h);
            if self.state[0] >= 0.5 {
                self.state = [1.0 - self.state[0], -self.state[1]];
                self.in_deficit = false;
            }
        } else {
            self.state = rk4_step(&ProfileKind::MinimalWave.rhs(), 0.0, self.state, h);
        }
    }

    /// `(U, U')`.
    fn wave(&self) -> State {
        if self.in_deficit {
            [1.0 - self.state[0], -self.state[1]]
        } else {
            self.state
        }
    }
}

/// Distance travelled from `1 - U = START_DEFICIT` to the `1/2` crossing.
fn distance_to_half(dz: f64) -> Result<f64> {
    let mut stepper = WaveStepper::start();
    let mut steps = 0usize;
    while steps as f64 * dz <= 500.0 {
        let mut next = stepper;
        next.advance(dz);
        if !next.in_deficit {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let trial = rk4_step(&deficit_rhs(), 0.0, stepper.state, mid * dz);
                if trial[0] < 0.5 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok((steps as f64 + 0.5 * (lo + hi)) * dz);
        }
        stepper = next;
        steps += 1;
    }
    Err(Error::NonConvergence("wave trajectory never reached 1/2".into()))
}

/// Grid states `(U, U')` on nodes `j * dz`, `j_lo <= j <= j_hi`, for the
/// orbit started at `z = -lead`.
fn integrate_from(lead: f64, dz: f64, j_lo: i64, j_hi: i64) -> Result<Vec<State>> {
    let start = -lead;
    let j1 = (start / dz).ceil() as i64;
    let mut out = Vec::with_capacity((j_hi - j_lo + 1) as usize);
    for j in j_lo..j1.min(j_hi + 1) {
        let d = START_DEFICIT * (LEFT_EIGENVALUE * (j as f64 * dz - start)).exp();
        out.push([1.0 - d, -LEFT_EIGENVALUE * d]);
    }
    let mut stepper = WaveStepper::start();
    stepper.advance(j1 as f64 * dz - start);
    let mut j = j1;
    while j <= j_hi {
        if j >= j_lo {
            let s = stepper.wave();
            if !(s[0] > 0.0 && s[0] < 1.0) {
                return Err(Error::NonConvergence(format!(
                    "wave trajectory left (0, 1) at z = {}: U = {:e}",
                    j as f64 * dz,
                    s[0]
                )));
            }
            out.push(s);
        }
        stepper.advance(dz);
        j += 1;
    }
    Ok(out)
}

/// Minimal wave on `[z_min, z_max]`, translated so that `U(0) = 1/2`.
pub fn minimal_wave(z_min: f64, z_max: f64, dz: f64) -> Result<WaveProfile> {
    if !(z_min <= -20.0) || !(z_max >= 40.0) {
        return Err(Error::Domain(format!(
            "minimal wave needs z_min <= -20 and z_max >= 40, got [{z_min}, {z_max}]"
        )));
    }
    check_grid_args(dz, 1e-3)?;
    let j_lo = (z_min / dz).floor() as i64;
    let j_hi = (z_max / dz).ceil() as i64;
    let zero = (-j_lo) as usize;
    let mut lead = distance_to_half(dz)?;
    let mut states = integrate_from(lead, dz, j_lo, j_hi)?;
    for _ in 0..20 {
        let [u, du] = states[zero];
        let miss = 0.5 - u;
        if miss.abs() <= 1e-15 {
            break;
        }
        lead += miss / du;
        states = integrate_from(lead, dz, j_lo, j_hi)?;
    }
    let (values, slopes) = states.into_iter().map(|s| (s[0], s[1])).unzip();
    Ok(WaveProfile::from_samples(j_lo as f64 * dz, dz, values, slopes, ProfileKind::MinimalWave))
}

/// `φ_γ` on `[0, z_max]`; `γ >= 1` (`γ = 1` is the KPP normalization).
pub fn phi_gamma(gamma: f64, z_max: f64, dz: f64) -> Result<WaveProfile> {
    if !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("phi_gamma needs gamma >= 1, got {gamma}")));
    }
    if !(z_max > 0.0) {
        return Err(Error::Domain(format!("phi_gamma needs z_max > 0, got {z_max}")));
    }
    check_grid_args(dz, 1e-2)?;
    let kind = ProfileKind::PhiGamma(gamma);
    let rhs = kind.rhs();
    let n = (z_max / dz).round() as usize;
    let mut values = Vec::with_capacity(n + 1);
    let mut slopes = Vec::with_capacity(n + 1);
    let mut state = [0.5 / gamma, 0.0];
    for i in 0..=n {
        let (u, du) = (state[0], state[1]);
        if i > 0 {
            if !(u > 0.0 && u < 1.0 / gamma) || !(du < 0.0) {
                return Err(Error::NonConvergence(format!(
                    "phi_gamma lost monotonicity at z = {}: φ = {u:e}, φ' = {du:e}",
                    i as f64 * dz
                )));
            }
            if du < -u {
                return Err(Error::NonConvergence(format!(
                    "phi_gamma has φ'/φ = {} < -1 at z = {}",
                    du / u,
                    i as f64 * dz
                )));
            }
        }
        values.push(u);
        slopes.push(du);
        state = rk4_step(&rhs, 0.0, state, dz);
    }
    Ok(WaveProfile::from_samples(0.0, dz, values, slopes, kind))
}
