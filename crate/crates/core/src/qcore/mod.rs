//! The math-type q-deformed oscillator: algebra, coherent states and the
//! time evolution of the position and momentum expectation values.
//!
//! Units are ħ = ω = 1 throughout. The deformation parameter lives in
//! (0, 1]; `q = 1` is admitted as the analytic non-deformed limit.

mod algebra;
mod dynamics;
mod oracle;
mod state;

use thiserror::Error;

pub use algebra::{energy, q_bracket, q_exponential, q_factorial, QExpSum};
pub use dynamics::{expect_p, expect_x, quadratures, simulate_series};
pub use oracle::{oracle_evolve, required_dim, FockMatrixSystem};
pub use state::{
    autocorrelation, check_amplitude_limit, coherent_coefficients, CoherentState, OscillatorParams, DEFAULT_MAX_TERMS,
    DEFAULT_TRUNC_TOL,
};

/// Largest imaginary residue tolerated when a real expectation value is
/// assembled from its complex series.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QError {
    #[error("deformation parameter q = {0} outside (0, 1]")]
    Domain(f64),
    #[error("|alpha|^2 = {alpha_sq} exceeds the amplitude limit 1/(1-q) = {bound} at q = {q}")]
    Inadmissible { q: f64, alpha_sq: f64, bound: f64 },
    #[error("q-exponential argument {x} outside the convergence radius 1/(1-q^2) = {radius}")]
    OutsideRadius { x: f64, radius: f64 },
    #[error("series did not reach tolerance {tol} within {max_terms} terms")]
    NonConvergence { tol: f64, max_terms: usize },
    #[error("q-factorial [{n}]! overflows")]
    Overflow { n: u32 },
    #[error("invalid numerical tolerances: trunc_tol = {trunc_tol}, max_terms = {max_terms}")]
    Tolerance { trunc_tol: f64, max_terms: usize },
    #[error("imaginary residue {residue:e} of a real expectation value exceeds {IMAG_RESIDUE_TOL:e}")]
    ImaginaryResidue { residue: f64 },
    #[error("Fock truncation {dim} too small: tail weight {tail:e} exceeds tolerance, need dim >= {required}")]
    TruncationInsufficient { dim: usize, required: usize, tail: f64 },
    #[error("invalid sampling: dt = {dt}, n = {n}")]
    Sampling { dt: f64, n: usize },
}

pub(crate) fn check_q(q: f64) -> Result<(), QError> {
    if q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(QError::Domain(q))
    }
}
