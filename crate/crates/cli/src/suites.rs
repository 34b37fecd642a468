//! Verification suites run by `kpp-lab verify`.

use clap::ValueEnum;
use kpp_core::ansatz_check::{self as ac, AnsatzSpec};
use kpp_core::heat_kernel as hk;
use kpp_core::report::{Claim, SampleDomain, Verdict, VerificationReport};
use kpp_core::Result;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Supersolutions,
    Subsolutions,
    Critical,
    Heat,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Supersolutions => "supersolutions",
            Suite::Subsolutions => "subsolutions",
            Suite::Critical => "critical",
            Suite::Heat => "heat",
        }
    }
}

/// Tail exponents checked when `--k` is not given; `r = (1-k)/2` covers
/// `{-1, 0, 1/2, 1, 5/4}`.
pub const DEFAULT_K: [f64; 5] = [3.0, 1.0, 0.0, -1.0, -1.5];

#[derive(Debug, Clone)]
pub struct Options {
    pub epsilon_scale: f64,
    pub k: Vec<f64>,
}

impl Options {
    /// Canonical text that the manifest digest is taken over.
    pub fn canonical(&self, suite: Suite) -> String {
        let ks: Vec<String> = self.k.iter().map(|k| k.to_string()).collect();
        format!("suite = {}\nepsilon_scale = {}\nk = {}\n", suite.name(), self.epsilon_scale, ks.join(","))
    }
}

type Job = Box<dyn Fn() -> Result<VerificationReport> + Send + Sync>;

const IDENTITY_SAMPLES: [(f64, f64); 6] = [(2.0, 0.3), (5.0, 1.0), (10.0, 5.0), (30.0, 2.0), (60.0, 12.0), (100.0, 4.0)];
const PHI_ETA_R: [f64; 2] = [-1.0, -0.25];

fn tw_domain() -> SampleDomain {
    SampleDomain { t_range: (0.0, 1e6), z_range: (-20.0, 40.0), n_t: 60, n_z: 200 }
}

fn phi_domain() -> SampleDomain {
    SampleDomain { t_range: (10.0, 1e5), z_range: (0.0, 2.0), n_t: 60, n_z: 200 }
}

fn decades(from: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| 10f64.powf(from + 0.5 * j as f64)).collect()
}

fn jobs(suite: Suite, opts: &Options) -> Vec<Job> {
    let mut out: Vec<Job> = Vec::new();
    match suite {
        Suite::Supersolutions => {
            for &k in &opts.k {
                let r = 0.5 * (1.0 - k);
                out.push(Box::new(move || {
                    let spec = AnsatzSpec::psi_super(r)?;
                    ac::check_supersolution(&spec, &ac::default_psi_domain(&spec))
                }));
                if r < 1.5 {
                    out.push(Box::new(move || ac::check_linear_residual_identity(r, r.max(0.0), &IDENTITY_SAMPLES)));
                }
                out.push(Box::new(move || ac::check_tw_shift(k, 1.0, &tw_domain())));
            }
        }
        Suite::Subsolutions => {
            for &k in &opts.k {
                let r = 0.5 * (1.0 - k);
                let scale = opts.epsilon_scale;
                out.push(Box::new(move || {
                    let spec = AnsatzSpec::psi_sub(r)?.with_epsilon_scale(scale);
                    ac::check_subsolution(&spec, &ac::default_psi_domain(&spec))
                }));
            }
            for r in PHI_ETA_R {
                out.push(Box::new(move || ac::check_phi_eta_sub(r, &phi_domain())));
            }
        }
        Suite::Critical => {
            out.push(Box::new(|| {
                let spec = AnsatzSpec::dirichlet_sub(None, None)?;
                ac::check_critical_sub(&spec, &SampleDomain { t_range: (1.0, 1e6), z_range: (0.0, 30.0), n_t: 60, n_z: 200 })
            }));
            out.push(Box::new(|| {
                let spec = AnsatzSpec::dirichlet_super(None)?;
                let AnsatzSpec::DirichletSuper { t0, .. } = spec else { unreachable!() };
                ac::check_critical_super(&spec, &SampleDomain { t_range: (t0, 1e8), z_range: (1e-3, 4.0), n_t: 60, n_z: 120 })
            }));
        }
        Suite::Heat => {
            out.push(Box::new(anchor_report));
            out.push(Box::new(|| hk::verify_postponed_bounds(&[1e3, 1e5, 1e7], 20, hk::DEFAULT_TOL)));
            out.push(Box::new(|| Ok(hk::verify_gradient_bound(&decades(2.0, 13), 120, hk::DEFAULT_TOL)?.report)));
            out.push(Box::new(|| {
                let xs: Vec<f64> = (1..=80).map(|j| 0.25 * j as f64).collect();
                hk::verify_lemma52(0.1, &decades(2.0, 13), &xs, hk::DEFAULT_TOL)
            }));
        }
    }
    out
}

/// Relative tolerance on `v(t, 2√t) · 2t / ln t` at `t = 1e8`.
pub const ANCHOR_TOL: f64 = 0.15;

pub fn anchor_ratio(t: f64) -> Result<f64> {
    Ok(hk::v_dirichlet(t, 2.0 * t.sqrt(), hk::DEFAULT_TOL)?.value * 2.0 * t / t.ln())
}

/// Band claim on the anchor ratio: residual is the unused part of the 15%
/// tolerance at `t = 1e8`, and the ratio must approach the limit from `1e4`.
fn anchor_report() -> Result<VerificationReport> {
    let limit = (-1.0f64).exp() / std::f64::consts::PI.sqrt();
    let (early, late) = (anchor_ratio(1e4)?, anchor_ratio(1e8)?);
    let mut rep = VerificationReport::new("heat_anchor", Claim::Band).param("limit", limit);
    rep.domain = SampleDomain { t_range: (1e4, 1e8), z_range: (2.0, 2.0), n_t: 2, n_z: 1 };
    rep.observed = Some((early, late));
    rep.worst_signed_residual = ANCHOR_TOL - (late / limit - 1.0).abs();
    rep.worst_at = (1e8, 2e4);
    rep.verdict = Verdict::Pass;
    rep.require(Claim::Band.holds_for(rep.worst_signed_residual), format!("ratio {late:.6} at t = 1e8, limit {limit:.6}"));
    rep.require((late - limit).abs() < (early - limit).abs(), format!("ratio {early:.6} at t = 1e4 is not farther from the limit"));
    Ok(rep)
}

/// Runs every check of the suite across the current rayon pool; output order
/// is fixed by the suite, not by thread scheduling.
pub fn run(suite: Suite, opts: &Options) -> Result<Vec<VerificationReport>> {
    jobs(suite, opts).par_iter().map(|job| job()).collect()
}
