use num_complex::Complex64;

use super::algebra::{bracket_unchecked, exp_radius};
use super::{check_q, QError};

pub const DEFAULT_TRUNC_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_TERMS: usize = 10_000;

/// The physical identity of a run: deformation `q`, coherent amplitude
/// `alpha`, and the numerical truncation controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    q: f64,
    alpha: Complex64,
    trunc_tol: f64,
    max_terms: usize,
}

impl OscillatorParams {
    pub fn new(q: f64, alpha: Complex64) -> Result<Self, QError> {
        Self::with_tolerances(q, alpha, DEFAULT_TRUNC_TOL, DEFAULT_MAX_TERMS)
    }

    /// Real coherent amplitude, default tolerances.
    pub fn real(q: f64, alpha: f64) -> Result<Self, QError> {
        Self::new(q, Complex64::new(alpha, 0.0))
    }

    pub fn with_tolerances(q: f64, alpha: Complex64, trunc_tol: f64, max_terms: usize) -> Result<Self, QError> {
        check_q(q)?;
        if !(trunc_tol > 0.0) || !trunc_tol.is_finite() || max_terms == 0 {
            return Err(QError::Tolerance { trunc_tol, max_terms });
        }
        if !check_amplitude_limit(q, alpha) {
            return Err(QError::Inadmissible { q, alpha_sq: alpha.norm_sqr(), bound: 1.0 / (1.0 - q) });
        }
        Ok(Self { q, alpha, trunc_tol, max_terms })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn trunc_tol(&self) -> f64 {
        self.trunc_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

/// Amplitude limit `|alpha|^2 <= 1/(1-q)`; always satisfied at `q = 1`.
/// The boundary itself is admissible.
pub fn check_amplitude_limit(q: f64, alpha: Complex64) -> bool {
    if q == 1.0 {
        return true;
    }
    let a2 = alpha.norm_sqr();
    // compare a2 (1-q) <= 1 to keep the boundary case exact
    a2.is_finite() && a2 * (1.0 - q) <= 1.0
}

/// Fock-basis expansion of the deformed coherent state, truncated where the
/// occupation probabilities fall below the tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentState {
    params: OscillatorParams,
    coeffs: Vec<Complex64>,
}

impl CoherentState {
    pub fn params(&self) -> &OscillatorParams {
        &self.params
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Number of retained Fock terms `N`.
    pub fn truncation_n(&self) -> usize {
        self.coeffs.len()
    }

    /// Occupation probabilities `|c_n|^2`.
    pub fn weights(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `<A> = sum_n conj(c_n) c_{n+1} sqrt([n+1])`.
    pub fn lowering_expectation(&self) -> Complex64 {
        let q = self.params.q;
        self.coeffs
            .windows(2)
            .enumerate()
            .map(|(n, w)| w[0].conj() * w[1] * bracket_unchecked(n as u32 + 1, q).sqrt())
            .sum()
    }
}

/// Unnormalized `|alpha|^{2n} / [n]!` for `n = 0..N`, stopping at the first
/// term that is below `trunc_tol` relative to the running sum (the last
/// retained term is that first small one).
pub(crate) fn occupation_series(params: &OscillatorParams) -> Result<Vec<f64>, QError> {
    let q = params.q;
    let x = params.alpha.norm_sqr();
    let radius = exp_radius(q);
    if x >= radius {
        return Err(QError::OutsideRadius { x, radius });
    }
    let mut weights = Vec::with_capacity(64);
    let mut term = 1.0_f64;
    let mut sum = 0.0_f64;
    for n in 0..params.max_terms {
        weights.push(term);
        sum += term;
        if n > 0 && term < params.trunc_tol * sum {
            return Ok(weights);
        }
        term *= x / bracket_unchecked(n as u32 + 1, q);
    }
    Err(QError::NonConvergence { tol: params.trunc_tol, max_terms: params.max_terms })
}

/// `c_n = N_q alpha^n / sqrt([n]!)` with `N_q = e_q(|alpha|^2)^{-1/2}`, the
/// reciprocal normalization that gives a unit-norm state.
pub fn coherent_coefficients(params: &OscillatorParams) -> Result<CoherentState, QError> {
    let weights = occupation_series(params)?;
    let total: f64 = weights.iter().sum();
    let norm = total.sqrt().recip();
    let q = params.q;
    let mut coeffs = Vec::with_capacity(weights.len());
    let mut c = Complex64::new(norm, 0.0);
    for n in 0..weights.len() {
        if n > 0 {
            c = c * params.alpha / bracket_unchecked(n as u32, q).sqrt();
        }
        coeffs.push(c);
    }
    Ok(CoherentState { params: *params, coeffs })
}

/// Overlap `<alpha(0)|alpha(t)>` of the evolved deformed coherent state with
/// its initial value.
pub fn autocorrelation(params: &OscillatorParams, t: f64) -> Result<Complex64, QError> {
    let weights = occupation_series(params)?;
    let total: f64 = weights.iter().sum();
    let q = params.q;
    let half = 0.5 * t * (1.0 + q * q);
    let sum: Complex64 = weights
        .iter()
        .enumerate()
        .map(|(n, w)| Complex64::from_polar(*w, -half * bracket_unchecked(n as u32, q)))
        .sum();
    Ok(Complex64::from_polar(1.0 / total, -0.5 * t) * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn amplitude_limit_examples() {
        assert!(!check_amplitude_limit(0.5, c(2.0)));
        assert!(check_amplitude_limit(0.75, c(2.0)));
        for q in [0.01, 0.1, 0.5, 0.9, 0.999, 1.0] {
            assert!(check_amplitude_limit(q, c(1.0)));
        }
        assert!(check_amplitude_limit(1.0, c(1e6)));
    }

    #[test]
    fn params_validation() {
        assert!(matches!(OscillatorParams::real(0.5, 2.0), Err(QError::Inadmissible { .. })));
        assert!(matches!(OscillatorParams::real(0.0, 1.0), Err(QError::Domain(_))));
        assert!(matches!(OscillatorParams::with_tolerances(0.5, c(1.0), 0.0, 10), Err(QError::Tolerance { .. })));
        assert!(matches!(OscillatorParams::with_tolerances(0.5, c(1.0), 1e-12, 0), Err(QError::Tolerance { .. })));
    }

    #[test]
    fn vacuum_state() {
        let p = OscillatorParams::real(0.6, 0.0).unwrap();
        let s = coherent_coefficients(&p).unwrap();
        assert_eq!(s.coeffs()[0], c(1.0));
        assert!(s.coeffs()[1..].iter().all(|z| *z == c(0.0)));
    }

    #[test]
    fn glauber_limit() {
        let p = OscillatorParams::real(1.0, 1.0).unwrap();
        let s = coherent_coefficients(&p).unwrap();
        let mut fact = 1.0;
        for (n, cn) in s.coeffs().iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            let expected = (-0.5_f64).exp() / fact.sqrt();
            assert_relative_eq!(cn.re, expected, max_relative = 1e-10);
            assert_eq!(cn.im, 0.0);
        }
    }

    #[test]
    fn normalization_by_direct_summation() {
        // e_q(|a|^2)^{-1} * sum |a|^{2n}/[n]! = 1, checked against an
        // independent straight summation of the q-factorials
        let q = 0.9_f64;
        let p = OscillatorParams::real(q, 1.0).unwrap();
        let s = coherent_coefficients(&p).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        let mut direct = 0.0;
        let mut fact = 1.0;
        for n in 0..400u32 {
            if n > 0 {
                fact *= (1.0 - q.powi(2 * n as i32)) / (1.0 - q * q);
            }
            direct += 1.0 / fact;
        }
        assert_relative_eq!(s.coeffs()[0].re, direct.sqrt().recip(), max_relative = 1e-11);
    }

    #[test]
    fn truncation_tail_is_small() {
        for (q, a) in [(0.1, 1.0), (0.5, 1.1), (0.95, 0.7), (1.0, 2.0)] {
            let p = OscillatorParams::real(q, a).unwrap();
            let s = coherent_coefficients(&p).unwrap();
            let last = s.coeffs().last().unwrap().norm_sqr();
            assert!(last < p.trunc_tol(), "q={q} a={a}");
            assert!((s.norm_sqr() - 1.0).abs() < 10.0 * p.trunc_tol());
        }
    }

    #[test]
    fn eigenstate_property() {
        for (q, a) in [
            (0.1, Complex64::new(1.0, 0.0)),
            (0.5, Complex64::new(0.6, -0.8)),
            (0.9, Complex64::new(1.0, 0.0)),
            (0.97, Complex64::new(-1.2, 0.4)),
            (1.0, Complex64::new(0.3, 1.1)),
        ] {
            let p = OscillatorParams::new(q, a).unwrap();
            let s = coherent_coefficients(&p).unwrap();
            assert!((s.lowering_expectation() - a).norm() < 1e-8, "q={q}");
        }
    }

    #[test]
    fn radius_guard() {
        // admissible by the amplitude limit, but outside the series radius
        let p = OscillatorParams::real(0.75, 2.0).unwrap();
        assert!(matches!(coherent_coefficients(&p), Err(QError::OutsideRadius { .. })));
    }

    #[test]
    fn autocorrelation_at_zero_and_bound() {
        let p = OscillatorParams::real(0.95, 1.0).unwrap();
        let c0 = autocorrelation(&p, 0.0).unwrap();
        assert!((c0 - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        for k in 0..500 {
            let t = k as f64 * 0.2;
            assert!(autocorrelation(&p, t).unwrap().norm() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn autocorrelation_q1_is_glauber() {
        // <a|a(t)> = exp(-it/2) exp(|a|^2 (e^{-it} - 1))
        let p = OscillatorParams::real(1.0, 1.0).unwrap();
        for k in 0..50 {
            let t = 0.37 * k as f64;
            let got = autocorrelation(&p, t).unwrap();
            let z = Complex64::from_polar(1.0, -t) - 1.0;
            let want = Complex64::from_polar(1.0, -0.5 * t) * z.exp();
            assert!((got - want).norm() < 1e-10);
        }
    }

    #[test]
    fn autocorrelation_not_periodic_when_deformed() {
        // the q = 1 overlap returns to unit modulus every 2 pi; at q = 0.95
        // it does not come back over the same window
        let p = OscillatorParams::real(0.95, 1.0).unwrap();
        let revival = (1..=15)
            .map(|k| autocorrelation(&p, 2.0 * std::f64::consts::PI * k as f64).unwrap().norm())
            .fold(0.0_f64, f64::max);
        assert!(revival < 0.99);
    }
}
