//! Brute-force reference for the expectation values: evolve the truncated
//! Fock-space state vector with the diagonal Hamiltonian and take matrix
//! quadratures with the explicit ladder operator. Shares nothing with the
//! closed-form series except the deformed integers themselves.

use num_complex::Complex64;

use super::algebra::{bracket_unchecked, energy_unchecked};
use super::state::occupation_series;
use super::{OscillatorParams, QError};

/// Truncated Fock-space representation: `A` has `sqrt([n])` on the first
/// superdiagonal (`A|n> = sqrt([n]) |n-1>`), the Hamiltonian is diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrixSystem {
    q: f64,
    lowering: Vec<f64>,
    h_diag: Vec<f64>,
}

impl FockMatrixSystem {
    pub fn new(q: f64, dim: usize) -> Result<Self, QError> {
        super::check_q(q)?;
        let lowering = (1..dim).map(|n| bracket_unchecked(n as u32, q).sqrt()).collect();
        let h_diag = (0..dim).map(|n| energy_unchecked(n as u32, q)).collect();
        Ok(Self { q, lowering, h_diag })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.h_diag.len()
    }

    pub fn h_diag(&self) -> &[f64] {
        &self.h_diag
    }

    /// Matrix element `<row|A|col>`.
    pub fn a_entry(&self, row: usize, col: usize) -> f64 {
        if col == row + 1 && col < self.dim() {
            self.lowering[row]
        } else {
            0.0
        }
    }

    /// `A psi`.
    pub fn lower(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for row in 0..psi.len().saturating_sub(1) {
            out[row] = psi[row + 1] * self.lowering[row];
        }
        out
    }

    /// `A^dagger psi`.
    pub fn raise(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for row in 1..psi.len() {
            out[row] = psi[row - 1] * self.lowering[row - 1];
        }
        out
    }

    /// `c_n(t) = c_n(0) exp(-i E_n t)`.
    pub fn evolve(&self, psi0: &[Complex64], t: f64) -> Vec<Complex64> {
        psi0.iter().zip(&self.h_diag).map(|(c, e)| c * Complex64::from_polar(1.0, -e * t)).collect()
    }

    /// `(<X>, <P>)` for a state vector.
    pub fn quadratures(&self, psi: &[Complex64]) -> (f64, f64) {
        let s = 0.5 * (1.0 + self.q * self.q).sqrt();
        let a_psi = self.lower(psi);
        let ad_psi = self.raise(psi);
        let braket = |v: &[Complex64]| -> Complex64 { psi.iter().zip(v).map(|(l, r)| l.conj() * r).sum() };
        let a = braket(&a_psi);
        let ad = braket(&ad_psi);
        let x = (a + ad) * s;
        let p = Complex64::i() * (ad - a) * s;
        (x.re, p.re)
    }
}

/// Smallest Fock dimension whose discarded tail is below `trunc_tol`.
pub fn required_dim(params: &OscillatorParams) -> Result<usize, QError> {
    occupation_series(params).map(|w| w.len())
}

/// Reference `(<X(t)>, <P(t)>)` from explicit state-vector evolution in a
/// `dim`-dimensional Fock space.
pub fn oracle_evolve(params: &OscillatorParams, dim: usize, t: f64) -> Result<(f64, f64), QError> {
    let weights = occupation_series(params)?;
    let required = weights.len();
    if dim < required {
        let total: f64 = weights.iter().sum();
        let tail = weights[dim.min(required)..].iter().sum::<f64>() / total;
        return Err(QError::TruncationInsufficient { dim, required, tail });
    }
    let system = FockMatrixSystem::new(params.q(), dim)?;
    let alpha = params.alpha();
    let mut psi = Vec::with_capacity(dim);
    let mut c = Complex64::new(1.0, 0.0);
    for n in 0..dim {
        if n > 0 {
            c = c * alpha / system.a_entry(n - 1, n);
        }
        psi.push(c);
    }
    let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|c| *c /= norm);
    let psi_t = system.evolve(&psi, t);
    Ok(system.quadratures(&psi_t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{expect_x, quadratures};
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn matrix_structure() {
        let q = 0.7;
        let sys = FockMatrixSystem::new(q, 12).unwrap();
        for r in 0..12 {
            for c in 0..12 {
                let want = if c == r + 1 { bracket_unchecked(c as u32, q).sqrt() } else { 0.0 };
                assert_eq!(sys.a_entry(r, c), want);
            }
            let e = bracket_unchecked(r as u32, q) + q.powi(2 * r as i32) / 2.0;
            assert!((sys.h_diag()[r] - e).abs() < 1e-15);
        }
    }

    #[test]
    fn deformed_commutator_holds_below_truncation() {
        // (A A^dag - q^2 A^dag A) psi = psi away from the truncation edge
        let q = 0.8;
        let sys = FockMatrixSystem::new(q, 20).unwrap();
        for n in 0..19 {
            let mut e = vec![Complex64::new(0.0, 0.0); 20];
            e[n] = Complex64::new(1.0, 0.0);
            let lhs_a = sys.lower(&sys.raise(&e));
            let lhs_b = sys.raise(&sys.lower(&e));
            let r = lhs_a[n] - lhs_b[n] * (q * q);
            assert!((r - 1.0).norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn matches_series_at_reference_point() {
        let p = OscillatorParams::real(0.9, 1.0).unwrap();
        let dim = required_dim(&p).unwrap();
        let (ox, op) = oracle_evolve(&p, dim, 17.3).unwrap();
        let (sx, sp) = quadratures(&p, 17.3).unwrap();
        assert!((ox - sx).abs() < 1e-8);
        assert!((op - sp).abs() < 1e-8);
    }

    #[test]
    fn vacuum_is_stationary() {
        let p = OscillatorParams::real(0.4, 0.0).unwrap();
        for t in [0.0, 1.0, 55.5] {
            let (x, m) = oracle_evolve(&p, 4, t).unwrap();
            assert_eq!((x, m), (0.0, 0.0));
        }
    }

    #[test]
    fn undeformed_half_period() {
        let p = OscillatorParams::real(1.0, 1.0).unwrap();
        let dim = required_dim(&p).unwrap();
        let (x, m) = oracle_evolve(&p, dim, PI).unwrap();
        assert!((x + SQRT_2).abs() < 1e-8);
        assert!(m.abs() < 1e-8);
    }

    #[test]
    fn too_small_dimension_reports_requirement() {
        let p = OscillatorParams::real(0.99, 1.0).unwrap();
        let need = required_dim(&p).unwrap();
        match oracle_evolve(&p, 5, 1.0) {
            Err(QError::TruncationInsufficient { dim, required, tail }) => {
                assert_eq!(dim, 5);
                assert_eq!(required, need);
                assert!(tail > p.trunc_tol());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn norm_conserved_under_evolution() {
        let p = OscillatorParams::real(0.6, 1.2).unwrap();
        let dim = required_dim(&p).unwrap();
        let sys = FockMatrixSystem::new(0.6, dim).unwrap();
        let state = crate::qcore::coherent_coefficients(&p).unwrap();
        for t in [0.0, 3.3, 77.0, 1234.5] {
            let psi = sys.evolve(state.coeffs(), t);
            let n: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-10);
        }
        let _ = expect_x(&p, 0.0).unwrap();
    }
}
