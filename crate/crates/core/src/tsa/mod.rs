//! Nonlinear time-series analysis: delay embedding, recurrence matrices,
//! power spectra, first-return times and largest Lyapunov exponents.
//!
//! Everything here is independent of the oscillator; inputs are plain
//! [`TimeSeries`](crate::TimeSeries) values.

mod embed;
mod lyapunov;
mod recurrence;
mod returns;
mod spectrum;

use thiserror::Error;

pub use embed::{
    average_mutual_information, choose_delay, choose_dimension, embed, embed_channels, false_neighbor_fraction,
    Embedding, AMI_BINS, AMI_MIN_WINDOW, FNN_MAX_POINTS, FNN_RATIO, FNN_TARGET, MAX_EMBEDDING_DIM,
};
pub use lyapunov::{
    lyapunov_rosenstein, lyapunov_rosenstein_embedded, lyapunov_wolf, lyapunov_wolf_embedded, select_linear_region,
    FitWindow, LyapunovEstimate, LyapunovMethod, RosensteinOptions, WolfOptions,
};
pub use recurrence::{recurrence, recurrence_from_embedding, rqa_summary, RecurrenceMatrix, RqaSummary};
pub use returns::{densest_cell, first_return_times, kolmogorov_pvalue, ReturnTimeDistribution, MIN_VISITS};
pub use spectrum::{
    dominant_period, mean_period, power_spectrum, spectral_peak_count, Spectrum, MIN_RESOLVED_CYCLES, MIN_SPECTRUM_LEN,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TsaError {
    #[error("series of length {len} too short: need at least {needed}")]
    TooShort { len: usize, needed: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("no delay found: mutual information has no minimum and the autocorrelation never crosses zero")]
    NoDelay,
    #[error("recurrence matrix is empty")]
    EmptyMatrix,
    #[error("cell visited {visits} times, need at least {needed}")]
    InsufficientVisits { visits: usize, needed: usize },
    #[error("no admissible nearest neighbour outside the Theiler window")]
    NoNeighbor,
}

pub(crate) fn param(msg: impl Into<String>) -> TsaError {
    TsaError::Parameter(msg.into())
}
