use num_complex::Complex64;
use rayon::prelude::*;

use super::state::occupation_series;
use super::{OscillatorParams, QError, IMAG_RESIDUE_TOL};
use crate::TimeSeries;

/// Precomputed series data for the expectation values: normalized weights
/// `|alpha|^{2n} / ([n]! e_q)` and the phase rates
/// `(1+q^2)/2 ([n] - [n+1]) = -(1+q^2) q^{2n} / 2`.
struct Quadratures {
    alpha: Complex64,
    prefactor: f64,
    weights: Vec<f64>,
    rates: Vec<f64>,
}

impl Quadratures {
    fn new(params: &OscillatorParams) -> Result<Self, QError> {
        let mut weights = occupation_series(params)?;
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let q = params.q();
        let q2 = q * q;
        let rates = (0..weights.len()).map(|n| -0.5 * (1.0 + q2) * q2.powi(n as i32)).collect();
        Ok(Self { alpha: params.alpha(), prefactor: 0.5 * (1.0 + q2).sqrt(), weights, rates })
    }

    fn at(&self, t: f64) -> Result<(f64, f64), QError> {
        // sum_n w_n alpha e^{i r_n t}  and  sum_n w_n conj(alpha) e^{-i r_n t}
        let mut lower = Complex64::new(0.0, 0.0);
        let mut raise = Complex64::new(0.0, 0.0);
        for (w, r) in self.weights.iter().zip(&self.rates) {
            let phase = Complex64::from_polar(*w, r * t);
            lower += phase;
            raise += phase.conj();
        }
        lower *= self.alpha;
        raise *= self.alpha.conj();

        let x = (lower + raise) * self.prefactor;
        let p = Complex64::i() * (raise - lower) * self.prefactor;
        let residue = x.im.abs().max(p.im.abs());
        if residue > IMAG_RESIDUE_TOL {
            return Err(QError::ImaginaryResidue { residue });
        }
        Ok((x.re, p.re))
    }
}

/// `(<X(t)>, <P(t)>)` in one pass over the Fock series.
pub fn quadratures(params: &OscillatorParams, t: f64) -> Result<(f64, f64), QError> {
    Quadratures::new(params)?.at(t)
}

/// Position expectation value `<X(t)>_q`.
pub fn expect_x(params: &OscillatorParams, t: f64) -> Result<f64, QError> {
    quadratures(params, t).map(|(x, _)| x)
}

/// Momentum expectation value `<P(t)>_q`.
pub fn expect_p(params: &OscillatorParams, t: f64) -> Result<f64, QError> {
    quadratures(params, t).map(|(_, p)| p)
}

/// Sample `<X>` and `<P>` at `t0 + k dt`, `k = 0..n`.
pub fn simulate_series(
    params: &OscillatorParams,
    t0: f64,
    dt: f64,
    n: usize,
) -> Result<(TimeSeries, TimeSeries), QError> {
    if !(dt > 0.0) || !dt.is_finite() || n < 2 || !t0.is_finite() {
        return Err(QError::Sampling { dt, n });
    }
    let quad = Quadratures::new(params)?;
    let samples: Vec<(f64, f64)> =
        (0..n).into_par_iter().map(|k| quad.at(t0 + k as f64 * dt)).collect::<Result<_, _>>()?;
    let (xs, ps): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
    let x = TimeSeries::new(t0, dt, xs).map_err(|_| QError::Sampling { dt, n })?;
    let p = TimeSeries::new(t0, dt, ps).map_err(|_| QError::Sampling { dt, n })?;
    Ok((x, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn initial_values_real_alpha() {
        // A|a> = a|a> gives <X(0)> = sqrt(1+q^2) a, <P(0)> = 0
        for (q, a) in [(0.1, 1.0), (0.5, 0.4), (0.9, 1.0), (0.95, 2.0), (1.0, 1.5)] {
            let p = OscillatorParams::real(q, a).unwrap();
            let (x, m) = quadratures(&p, 0.0).unwrap();
            assert_relative_eq!(x, (1.0 + q * q).sqrt() * a, max_relative = 1e-10);
            assert!(m.abs() < 1e-12);
        }
    }

    #[test]
    fn complex_alpha_initial_values() {
        let a = Complex64::new(0.3, -0.7);
        let p = OscillatorParams::new(0.8, a).unwrap();
        let (x, m) = quadratures(&p, 0.0).unwrap();
        let s = (1.0_f64 + 0.64).sqrt();
        assert_relative_eq!(x, s * a.re, max_relative = 1e-10);
        assert_relative_eq!(m, s * a.im, max_relative = 1e-10);
    }

    #[test]
    fn undeformed_limit_is_cosine() {
        let p = OscillatorParams::real(1.0, 1.0).unwrap();
        for k in 0..200 {
            let t = k as f64 * 0.731;
            assert!((expect_x(&p, t).unwrap() - SQRT_2 * t.cos()).abs() < 1e-9);
            assert!((expect_p(&p, t).unwrap() + SQRT_2 * t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn simulate_period_at_q1() {
        let p = OscillatorParams::real(1.0, 1.0).unwrap();
        let (x, _) = simulate_series(&p, 0.0, 2.0 * PI / 100.0, 101).unwrap();
        assert_eq!(x.len(), 101);
        assert!((x.values()[0] - x.values()[100]).abs() < 1e-9);
    }

    #[test]
    fn simulate_rejects_bad_sampling() {
        let p = OscillatorParams::real(0.5, 1.0).unwrap();
        assert!(matches!(simulate_series(&p, 0.0, 0.0, 10), Err(QError::Sampling { .. })));
        assert!(matches!(simulate_series(&p, 0.0, 0.1, 1), Err(QError::Sampling { .. })));
    }

    #[test]
    fn simulation_is_deterministic() {
        let p = OscillatorParams::real(0.9, 1.0).unwrap();
        let a = simulate_series(&p, 0.0, 0.1, 500).unwrap();
        let b = simulate_series(&p, 0.0, 0.1, 500).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn deformed_signal_is_bounded() {
        let p = OscillatorParams::real(0.9, 1.0).unwrap();
        let (x, m) = simulate_series(&p, 0.0, 0.1, 3000).unwrap();
        let bound = (1.0_f64 + 0.81).sqrt();
        assert!(x.values().iter().chain(m.values()).all(|v| v.abs() <= bound + 1e-12));
    }
}
