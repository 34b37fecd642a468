//! Uniform record for numerical checks.

use std::fmt::Write as _;

/// Slack allowed on sign claims.
pub const SIGN_SLACK: f64 = 1e-12;
/// Largest accepted relative disagreement between a closed form and finite differences.
pub const MISMATCH_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    /// Residual `>= -SIGN_SLACK` (super-solution).
    NonNegative,
    /// Residual `<= SIGN_SLACK` (sub-solution).
    NonPositive,
    /// `|residual| <= SIGN_SLACK` (both).
    Vanishing,
    /// Observed quantity stays inside a band; the residual is the smallest margin.
    Band,
    /// Running supremum stabilizes; the residual is its last relative increase.
    Stabilizes,
    /// Empirical constant stays bounded; the residual is its growth over the last decades.
    Bounded,
    /// Closed form agrees with finite differences; the residual is the mismatch.
    Agrees,
}

impl Claim {
    pub fn name(self) -> &'static str {
        match self {
            Claim::NonNegative => "nonnegative",
            Claim::NonPositive => "nonpositive",
            Claim::Vanishing => "vanishing",
            Claim::Band => "band",
            Claim::Stabilizes => "stabilizes",
            Claim::Bounded => "bounded",
            Claim::Agrees => "agrees",
        }
    }

    /// Sign verdict for a signed residual extreme.
    pub fn holds_for(self, worst: f64) -> bool {
        match self {
            Claim::NonNegative => worst >= -SIGN_SLACK,
            Claim::NonPositive => worst <= SIGN_SLACK,
            Claim::Vanishing => worst.abs() <= SIGN_SLACK,
            Claim::Band => worst >= 0.0,
            Claim::Stabilizes | Claim::Bounded => worst < 0.01,
            Claim::Agrees => worst <= MISMATCH_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SampleDomain {
    pub t_range: (f64, f64),
    pub z_range: (f64, f64),
    pub n_t: usize,
    pub n_z: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub check: String,
    pub parameters: Vec<(String, f64)>,
    pub claim: Claim,
    pub domain: SampleDomain,
    /// Extreme of the residual in the direction that could violate the claim.
    pub worst_signed_residual: f64,
    /// `(t, z)` where the extreme occurs.
    pub worst_at: (f64, f64),
    /// Largest relative disagreement between the closed form and finite differences.
    pub closed_form_mismatch: Option<f64>,
    /// Smallest and largest value of the monitored quantity.
    pub observed: Option<(f64, f64)>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, claim: Claim) -> Self {
        Self {
            check: check.into(),
            parameters: Vec::new(),
            claim,
            domain: SampleDomain::default(),
            worst_signed_residual: f64::NAN,
            worst_at: (f64::NAN, f64::NAN),
            closed_form_mismatch: None,
            observed: None,
            verdict: Verdict::Fail,
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.parameters.push((name.to_string(), value));
        self
    }

    pub fn get_param(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|(n, _)| n == name).map(|p| p.1)
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Fails the report when `ok` is false, recording `note`.
    pub fn require(&mut self, ok: bool, note: impl Into<String>) {
        if !ok {
            self.verdict = Verdict::Fail;
            self.notes.push(note.into());
        }
    }

    pub fn parameter_string(&self) -> String {
        self.parameters
            .iter()
            .map(|(n, v)| format!("{n}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn text_block(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[{}] {} ({})", self.verdict.name().to_uppercase(), self.check, self.claim.name());
        if !self.parameters.is_empty() {
            let _ = writeln!(s, "  parameters  {}", self.parameter_string());
        }
        let d = &self.domain;
        let _ = writeln!(
            s,
            "  domain      t in [{:.4e}, {:.4e}] x {} , z in [{:.4e}, {:.4e}] x {}",
            d.t_range.0, d.t_range.1, d.n_t, d.z_range.0, d.z_range.1, d.n_z
        );
        let _ = writeln!(
            s,
            "  worst       {:.6e} at (t, z) = ({:.4e}, {:.4e})",
            self.worst_signed_residual, self.worst_at.0, self.worst_at.1
        );
        if let Some(m) = self.closed_form_mismatch {
            let _ = writeln!(s, "  fd mismatch {m:.3e}");
        }
        if let Some((lo, hi)) = self.observed {
            let _ = writeln!(s, "  observed    [{lo:.6e}, {hi:.6e}]");
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note        {n}");
        }
        s
    }

    pub const CSV_HEADER: [&'static str; 17] = [
        "check",
        "verdict",
        "claim",
        "worst_signed_residual",
        "worst_t",
        "worst_z",
        "closed_form_mismatch",
        "observed_min",
        "observed_max",
        "t_min",
        "t_max",
        "n_t",
        "z_min",
        "z_max",
        "n_z",
        "parameters",
        "notes",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let f = |x: f64| format!("{x:.16e}");
        let opt = |x: Option<f64>| x.map(f).unwrap_or_default();
        vec![
            self.check.clone(),
            self.verdict.name().to_string(),
            self.claim.name().to_string(),
            f(self.worst_signed_residual),
            f(self.worst_at.0),
            f(self.worst_at.1),
            opt(self.closed_form_mismatch),
            opt(self.observed.map(|o| o.0)),
            opt(self.observed.map(|o| o.1)),
            f(self.domain.t_range.0),
            f(self.domain.t_range.1),
            self.domain.n_t.to_string(),
            f(self.domain.z_range.0),
            f(self.domain.z_range.1),
            self.domain.n_z.to_string(),
            self.parameter_string(),
            self.notes.join(" | "),
        ]
    }
}
