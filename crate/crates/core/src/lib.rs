//! Numerical laboratory for Fisher-KPP fronts started from initial data with
//! tails `x^k e^{-x}`.
//!
//! The crate simulates `u_t = u_xx + u(1-u)` in the frame moving at the
//! minimal speed 2, measures the logarithmic drift of level sets, and checks
//! numerically the sign conditions of the sub- and super-solutions used to
//! locate the front:
//!
//! * [`special_fn`]: Gamma, Kummer's `1F1` and the self-similar profile `w`.
//! * [`wave_ode`]: the minimal traveling wave `U` and the pushed profile `φ_γ`.
//! * [`pde_sim`]: IMEX finite-difference solver and level-set extraction.
//! * [`front_fit`]: drift-law fits and shift-minimized distance to `U`.
//! * [`heat_kernel`]: kernel quadratures for the linear problems.
//! * [`ansatz_check`]: residual identities and sign certificates.

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz_check;
pub mod error;
pub mod front_fit;
pub mod grid;
pub mod heat_kernel;
pub mod io;
pub mod pde_sim;
pub mod quadrature;
pub mod report;
pub mod rk4;
pub mod special_fn;
pub mod tridiag;
pub mod wave_ode;

pub use error::{Error, Result};
pub use grid::GridFunction;
