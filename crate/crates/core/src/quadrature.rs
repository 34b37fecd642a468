//! Globally adaptive 7/15-point Gauss-Kronrod quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss weights at `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Panel error floor relative to `∫|f|`; targets below twice this are
/// raised to it.
const ROUNDOFF: f64 = 5.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

/// Accuracy target `max(abs, rel·|I|, rel_l1·∫|f|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub rel_l1: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel, rel_l1: 0.0 }
    }

    fn target(&self, value: f64, l1: f64) -> f64 {
        self.abs.max(self.rel * value.abs()).max(self.rel_l1 * l1)
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    l1: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Panel {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut l1 = WGK[7] * fc.abs();
    let mut fv = [[0.0; 2]; 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv[j] = [f1, f2];
        kronrod += WGK[j] * (f1 + f2);
        l1 += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[j][0] - mean).abs() + (fv[j][1] - mean).abs());
    }
    let value = kronrod * h;
    let asc = asc * h.abs();
    let l1 = l1 * h.abs();
    let mut error = ((kronrod - gauss) * h).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    error = error.max(ROUNDOFF * l1);
    Panel { lo, hi, value, error, l1 }
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the panels
/// delimited by `points` (sorted, duplicates ignored).
pub fn integrate<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: Tolerance, max_evals: usize) -> Result<QuadratureResult> {
    let mut pts: Vec<f64> = points.iter().copied().filter(|p| p.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Ok(QuadratureResult { value: 0.0, abs_error_estimate: 0.0, evaluations: 0 });
    }
    let mut heap = BinaryHeap::new();
    let mut settled: Vec<Panel> = Vec::new();
    let mut evals = 0usize;
    for w in pts.windows(2) {
        heap.push(gk15(&f, w[0], w[1]));
        evals += 15;
    }
    loop {
        let (value, error, l1) = heap
            .iter()
            .chain(settled.iter())
            .fold((0.0, 0.0, 0.0), |(v, e, a), p| (v + p.value, e + p.error, a + p.l1));
        if !value.is_finite() {
            return Err(Error::NonConvergence("integrand produced a non-finite value".into()));
        }
        let target = tol.target(value, l1).max(2.0 * ROUNDOFF * l1);
        if error <= target || heap.is_empty() {
            if error > target {
                return Err(Error::ToleranceNotMet { estimate: error, requested: target });
            }
            return Ok(QuadratureResult { value, abs_error_estimate: error, evaluations: evals });
        }
        if evals >= max_evals {
            return Err(Error::ToleranceNotMet { estimate: error, requested: target });
        }
        // refine the worst panels in a batch to amortize the global sums
        for _ in 0..8 {
            let Some(p) = heap.pop() else { break };
            let mid = 0.5 * (p.lo + p.hi);
            if !(mid > p.lo && mid < p.hi) || (p.hi - p.lo) <= 4.0 * f64::EPSILON * p.lo.abs().max(p.hi.abs()) {
                settled.push(p);
                continue;
            }
            heap.push(gk15(&f, p.lo, mid));
            heap.push(gk15(&f, mid, p.hi));
            evals += 30;
        }
    }
}
