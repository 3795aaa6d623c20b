//! Expectation-value dynamics of the math-type q-deformed harmonic oscillator
//! in a deformed coherent state, together with the nonlinear time-series
//! tools used to sort the resulting signals into periodic, quasi-periodic
//! and chaotic regimes.
//!
//! * [`qcore`] evaluates the deformed algebra, the coherent state and the
//!   closed-form expectation values, plus an independent Fock-space oracle.
//! * [`tsa`] is a general-purpose analysis toolkit: delay embedding,
//!   recurrence matrices, Hann-windowed periodograms, first-return times and
//!   largest-Lyapunov-exponent estimators (Rosenstein and Wolf).
//! * [`regime`] glues the two together into feature vectors, labels and
//!   parameter-plane sweeps.

// Guards such as `!(x > 0.0)` deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(test)]
mod proptests;
pub mod qcore;
pub mod regime;
mod series;
pub mod tsa;

pub use series::{SeriesError, TimeSeries};
