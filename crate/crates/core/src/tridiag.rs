//! Thomas algorithm for tridiagonal systems, with a reusable factorization.

use crate::error::{Error, Result};

/// LU factors of a tridiagonal matrix. Row `i` reads
/// `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    upper_scaled: Vec<f64>,
}

impl TridiagonalLu {
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        if lower.len() != n || upper.len() != n {
            return Err(Error::GridMismatch(format!(
                "tridiagonal bands of lengths {}, {}, {}",
                lower.len(),
                n,
                upper.len()
            )));
        }
        let mut inv_pivot = vec![0.0; n];
        let mut upper_scaled = vec![0.0; n];
        for i in 0..n {
            let pivot = if i == 0 { diag[0] } else { diag[i] - lower[i] * upper_scaled[i - 1] };
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::NonConvergence(format!("zero pivot in tridiagonal row {i}")));
            }
            inv_pivot[i] = 1.0 / pivot;
            upper_scaled[i] = upper[i] * inv_pivot[i];
        }
        Ok(Self { lower: lower.to_vec(), inv_pivot, upper_scaled })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_scaled[i] * rhs[i + 1];
        }
    }
}

pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let lu = TridiagonalLu::factor(lower, diag, upper)?;
    if rhs.len() != lu.len() {
        return Err(Error::GridMismatch(format!("rhs length {} vs {}", rhs.len(), lu.len())));
    }
    let mut x = rhs.to_vec();
    lu.solve_in_place(&mut x);
    Ok(x)
}
