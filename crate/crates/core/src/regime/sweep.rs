use num_complex::Complex64;
use rayon::prelude::*;

use super::{classify, extract_features, FeatureConfig, RegimeError, RegimeLabel, DEFAULT_LAMBDA_THRESHOLD};
use crate::qcore::{check_amplitude_limit, simulate_series, OscillatorParams};

/// Simulation and analysis settings shared by every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
    pub features: FeatureConfig,
    pub lambda_threshold: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            t0: 0.0,
            dt: 0.1,
            steps: 15_000,
            features: FeatureConfig::default(),
            lambda_threshold: DEFAULT_LAMBDA_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// The amplitude limit `|alpha|^2 <= 1/(1-q)` is violated; nothing was
    /// simulated.
    Inadmissible,
    Labelled(RegimeLabel),
    /// Simulation or analysis failed at this point.
    Error(String),
}

impl Cell {
    /// Label column text: the regime name, `Inadmissible` or `Error`.
    pub fn label_str(&self) -> &'static str {
        match self {
            Cell::Inadmissible => "Inadmissible",
            Cell::Labelled(l) => l.label.as_str(),
            Cell::Error(_) => "Error",
        }
    }

    pub fn label(&self) -> Option<&RegimeLabel> {
        match self {
            Cell::Labelled(l) => Some(l),
            _ => None,
        }
    }
}

/// Labels over the `(q, alpha)` plane, stored alpha-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub q_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub cells: Vec<Cell>,
}

impl PhaseDiagram {
    pub fn get(&self, qi: usize, ai: usize) -> &Cell {
        &self.cells[ai * self.q_grid.len() + qi]
    }

    /// `(q, alpha, cell)` in alpha-major order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, &Cell)> {
        let nq = self.q_grid.len();
        self.cells.iter().enumerate().map(move |(k, c)| (self.q_grid[k % nq], self.alpha_grid[k / nq], c))
    }
}

/// Grids must be non-empty with `q` in `(0, 1]` and positive finite `alpha`.
pub fn validate_grid(q_grid: &[f64], alpha_grid: &[f64]) -> Result<(), RegimeError> {
    if q_grid.is_empty() || alpha_grid.is_empty() {
        return Err(RegimeError::Parameter("empty grid".into()));
    }
    if let Some(q) = q_grid.iter().find(|&&q| !(q > 0.0 && q <= 1.0)) {
        return Err(RegimeError::Parameter(format!("q = {q} outside (0, 1]")));
    }
    if let Some(a) = alpha_grid.iter().find(|&&a| !(a > 0.0 && a.is_finite())) {
        return Err(RegimeError::Parameter(format!("alpha = {a} must be positive and finite")));
    }
    Ok(())
}

/// Simulate, analyse and label one grid point.
pub fn sweep_point(q: f64, alpha: f64, cfg: &SimConfig) -> Cell {
    if !check_amplitude_limit(q, Complex64::new(alpha, 0.0)) {
        return Cell::Inadmissible;
    }
    let run = || -> Result<RegimeLabel, RegimeError> {
        let params = OscillatorParams::real(q, alpha)?;
        let (x, p) = simulate_series(&params, cfg.t0, cfg.dt, cfg.steps)?;
        let f = extract_features(&x, Some(&p), &cfg.features)?;
        classify(&f, cfg.lambda_threshold)
    };
    match run() {
        Ok(l) => Cell::Labelled(l),
        Err(e) => Cell::Error(e.to_string()),
    }
}

/// Label every grid point. Points run concurrently; the result is in fixed
/// grid order regardless of scheduling.
pub fn sweep(q_grid: &[f64], alpha_grid: &[f64], cfg: &SimConfig) -> Result<PhaseDiagram, RegimeError> {
    validate_grid(q_grid, alpha_grid)?;
    let nq = q_grid.len();
    let cells = (0..nq * alpha_grid.len())
        .into_par_iter()
        .map(|k| sweep_point(q_grid[k % nq], alpha_grid[k / nq], cfg))
        .collect();
    Ok(PhaseDiagram { q_grid: q_grid.to_vec(), alpha_grid: alpha_grid.to_vec(), cells })
}

/// Rosenstein λ_max against q at fixed amplitude.
pub fn lambda_vs_q_curve(alpha: Complex64, q_grid: &[f64], cfg: &SimConfig) -> Vec<(f64, Result<f64, RegimeError>)> {
    q_grid
        .par_iter()
        .map(|&q| {
            let lambda = (|| {
                let params = OscillatorParams::new(q, alpha)?;
                let (x, p) = simulate_series(&params, cfg.t0, cfg.dt, cfg.steps)?;
                let f = extract_features(&x, Some(&p), &cfg.features)?;
                if f.lambda_max.is_nan() {
                    return Err(RegimeError::Parameter(f.failures.join("; ")));
                }
                Ok(f.lambda_max)
            })();
            (q, lambda)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inadmissible_points_skip_simulation() {
        let cfg = SimConfig::default();
        assert_eq!(sweep_point(0.5, 2.0, &cfg), Cell::Inadmissible);
        assert_eq!(sweep_point(0.7, 2.0, &cfg).label_str(), "Inadmissible");
    }

    #[test]
    fn grid_validation() {
        let cfg = SimConfig::default();
        assert!(sweep(&[], &[1.0], &cfg).is_err());
        assert!(sweep(&[0.5], &[], &cfg).is_err());
        assert!(sweep(&[1.2], &[1.0], &cfg).is_err());
        assert!(sweep(&[0.5], &[-1.0], &cfg).is_err());
    }

    #[test]
    fn short_runs_become_error_cells() {
        let cfg = SimConfig { steps: 500, ..SimConfig::default() };
        let d = sweep(&[0.5, 0.9], &[1.0, 2.0], &cfg).unwrap();
        assert_eq!(d.get(0, 1), &Cell::Inadmissible);
        assert!(matches!(d.get(1, 0), Cell::Error(_)));
        let labels: Vec<_> = d.iter().map(|(q, a, c)| (q, a, c.label_str())).collect();
        assert_eq!(labels[1], (0.9, 1.0, "Error"));
        assert_eq!(labels[2], (0.5, 2.0, "Inadmissible"));
    }
}
