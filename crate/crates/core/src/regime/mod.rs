//! Regime labelling: combine time-series features into a periodic,
//! quasi-periodic or chaotic verdict and sweep the (q, alpha) plane.

mod features;
mod sweep;

use thiserror::Error;

use crate::qcore::QError;
use crate::tsa::TsaError;

pub use features::{extract_features, FeatureConfig, FeatureVector, Trajectory, MIN_FEATURE_LEN};
pub use sweep::{lambda_vs_q_curve, sweep, sweep_point, validate_grid, Cell, PhaseDiagram, SimConfig};

/// Default bound on λ_max (per unit time, ω = 1) above which a signal may
/// be called chaotic.
pub const DEFAULT_LAMBDA_THRESHOLD: f64 = 0.01;
/// Largest relative Rosenstein–Wolf gap for which the two estimates count
/// as agreeing.
pub const AGREEMENT_BOUND: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegimeError {
    #[error(transparent)]
    Oscillator(#[from] QError),
    #[error(transparent)]
    Analysis(#[from] TsaError),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Periodic,
    QuasiPeriodic,
    Chaotic,
    /// A feature the decision depends on could not be computed.
    Indeterminate,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Periodic => "Periodic",
            Regime::QuasiPeriodic => "QuasiPeriodic",
            Regime::Chaotic => "Chaotic",
            Regime::Indeterminate => "Indeterminate",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Regime {
    type Err = RegimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Periodic" => Ok(Regime::Periodic),
            "QuasiPeriodic" => Ok(Regime::QuasiPeriodic),
            "Chaotic" => Ok(Regime::Chaotic),
            "Indeterminate" => Ok(Regime::Indeterminate),
            other => Err(RegimeError::Parameter(format!("unknown regime {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeLabel {
    pub label: Regime,
    pub features: FeatureVector,
}

/// Decision rule: chaotic when λ_max exceeds the threshold and the two
/// estimators agree; otherwise quasi-periodic when the spectrum or the
/// recurrence texture shows more than one frequency; otherwise periodic.
pub fn classify(f: &FeatureVector, lambda_threshold: f64) -> Result<RegimeLabel, RegimeError> {
    if !(lambda_threshold > 0.0 && lambda_threshold.is_finite()) {
        return Err(RegimeError::Parameter("lambda threshold must be positive".into()));
    }
    let label = if f.partial {
        Regime::Indeterminate
    } else if f.lambda_max > lambda_threshold && f.lambda_agreement < AGREEMENT_BOUND {
        Regime::Chaotic
    } else if f.peak_count >= 2 || f.diag_spacing_clusters >= 2 {
        Regime::QuasiPeriodic
    } else {
        Regime::Periodic
    };
    Ok(RegimeLabel { label, features: f.clone() })
}
