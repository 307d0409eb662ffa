//! Lower bounds on continuous estimation of a fluctuating optical phase.
//!
//! The library models stationary Gaussian beams (coherent, OPO-squeezed, or
//! raw quadrature spectra) carrying a stochastically fluctuating phase, builds
//! the quantum and classical Fisher information spectra, and evaluates the
//! mean-square-error lower bound `F^-1(0)` together with its scaling laws:
//! the stochastic standard quantum limit `(kappa/N)^((p-1)/p)` for coherent
//! beams and the stochastic Heisenberg limit `(kappa/N)^(2(p-1)/(p+1))` for
//! squeezed ones, including the optimal `p = 2` constant `C0 ~= 0.20788`.
//! A linear-Gaussian tracking simulator cross-checks attainability.

// Parameter guards are written as `!(x > 0.0)` so NaN fails validation;
// the suggested `x <= 0.0` would let it through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotic;
pub mod bound;
pub mod error;
mod fft;
pub mod fisher;
mod quad;
pub mod spectra;
pub mod tracking;

pub use error::{Error, Result};
