use super::{check_q, QError};

/// The deformed integer `[n] = (1 - q^{2n}) / (1 - q^2)`, with `[n] = n`
/// exactly at `q = 1`.
///
/// Both numerator and denominator go through `expm1` so that q close to one
/// keeps full relative precision.
pub fn q_bracket(n: u32, q: f64) -> Result<f64, QError> {
    check_q(q)?;
    Ok(bracket_unchecked(n, q))
}

pub(crate) fn bracket_unchecked(n: u32, q: f64) -> f64 {
    if q == 1.0 || n == 0 {
        return n as f64;
    }
    let ln_q2 = 2.0 * q.ln();
    (n as f64 * ln_q2).exp_m1() / ln_q2.exp_m1()
}

/// `[n]! = [1][2]...[n]`, `[0]! = 1`.
pub fn q_factorial(n: u32, q: f64) -> Result<f64, QError> {
    check_q(q)?;
    let mut acc = 1.0_f64;
    for k in 1..=n {
        acc *= bracket_unchecked(k, q);
        if !acc.is_finite() {
            return Err(QError::Overflow { n });
        }
    }
    Ok(acc)
}

/// Energy eigenvalue `E_{q,n} = [n] + q^{2n} / 2`.
pub fn energy(n: u32, q: f64) -> Result<f64, QError> {
    check_q(q)?;
    Ok(energy_unchecked(n, q))
}

pub(crate) fn energy_unchecked(n: u32, q: f64) -> f64 {
    bracket_unchecked(n, q) + 0.5 * q.powi(2 * n as i32)
}

/// Radius of convergence of `sum x^n / [n]!`; infinite at `q = 1`.
pub(crate) fn exp_radius(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else {
        1.0 / (1.0 - q * q)
    }
}

/// Partial sum of the q-exponential and the number of terms it used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QExpSum {
    pub value: f64,
    pub terms: usize,
}

/// `e_q(x) = sum_{n>=0} x^n / [n]!`, summed until the next term drops below
/// `tol` in magnitude.
pub fn q_exponential(x: f64, q: f64, tol: f64, max_terms: usize) -> Result<QExpSum, QError> {
    check_q(q)?;
    if !(tol > 0.0) || max_terms == 0 {
        return Err(QError::Tolerance { trunc_tol: tol, max_terms });
    }
    let radius = exp_radius(q);
    if x.abs() >= radius {
        return Err(QError::OutsideRadius { x, radius });
    }
    let mut term = 1.0_f64;
    let mut sum = 0.0_f64;
    for n in 0..max_terms {
        sum += term;
        let next = term * x / bracket_unchecked(n as u32 + 1, q);
        if next.abs() < tol {
            return Ok(QExpSum { value: sum, terms: n + 1 });
        }
        term = next;
    }
    Err(QError::NonConvergence { tol, max_terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bracket_examples() {
        assert_eq!(q_bracket(0, 0.5).unwrap(), 0.0);
        for q in [0.1, 0.5, 0.9, 0.999] {
            assert_relative_eq!(q_bracket(1, q).unwrap(), 1.0, max_relative = 1e-14);
        }
        assert_relative_eq!(q_bracket(2, 0.5).unwrap(), 1.25, max_relative = 1e-14);
        assert_eq!(q_bracket(5, 1.0).unwrap(), 5.0);
    }

    #[test]
    fn bracket_domain() {
        assert_eq!(q_bracket(3, 0.0), Err(QError::Domain(0.0)));
        assert_eq!(q_bracket(3, 1.5), Err(QError::Domain(1.5)));
        assert!(q_bracket(3, f64::NAN).is_err());
    }

    #[test]
    fn bracket_recursion() {
        // [n+1] = 1 + q^2 [n]
        for qi in 1..=99 {
            let q = qi as f64 / 100.0;
            for n in 0..200 {
                let lhs = q_bracket(n + 1, q).unwrap();
                let rhs = 1.0 + q * q * q_bracket(n, q).unwrap();
                assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0), "q={q} n={n}");
            }
        }
    }

    #[test]
    fn bracket_near_one_approaches_n() {
        let q = 1.0 - 1e-9;
        for n in [1u32, 10, 100] {
            assert_relative_eq!(q_bracket(n, q).unwrap(), n as f64, max_relative = 1e-6);
        }
    }

    #[test]
    fn factorial_examples() {
        assert_eq!(q_factorial(0, 0.3).unwrap(), 1.0);
        assert_relative_eq!(q_factorial(2, 0.5).unwrap(), 1.25, max_relative = 1e-14);
        assert_eq!(q_factorial(3, 1.0).unwrap(), 6.0);
        assert_eq!(q_factorial(400, 1.0), Err(QError::Overflow { n: 400 }));
    }

    #[test]
    fn energy_examples() {
        for q in [0.2, 0.7, 1.0] {
            assert_eq!(energy(0, q).unwrap(), 0.5);
        }
        for n in 0..20 {
            assert_eq!(energy(n, 1.0).unwrap(), n as f64 + 0.5);
        }
    }

    #[test]
    fn energy_saturates_when_deformed() {
        // increments q^{2n}(1+q^2)/2 shrink geometrically; the spectrum
        // accumulates below 1/(1-q^2)
        let q = 0.9;
        let e: Vec<f64> = (0..60).map(|n| energy(n, q).unwrap()).collect();
        assert!(e.windows(2).all(|w| w[1] > w[0]));
        let gaps: Vec<f64> = e.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(gaps.windows(2).all(|g| g[1] < g[0]));
        assert!(e[59] < 1.0 / (1.0 - q * q));
    }

    #[test]
    fn exponential_examples() {
        assert_eq!(q_exponential(0.0, 0.4, 1e-12, 10).unwrap().value, 1.0);
        let e1 = q_exponential(1.0, 1.0, 1e-12, 100).unwrap();
        assert_relative_eq!(e1.value, std::f64::consts::E, max_relative = 1e-12);
        // 50-digit reference summation of sum 1/[n]! at q = 0.5
        let r = q_exponential(1.0, 0.5, 1e-12, 200).unwrap();
        assert_relative_eq!(r.value, 5.246_922_619_400_049, max_relative = 1e-11);
        assert!(r.terms > 1 && r.terms < 200);
    }

    #[test]
    fn exponential_errors() {
        assert!(matches!(q_exponential(2.0, 0.7, 1e-12, 1000), Err(QError::OutsideRadius { .. })));
        assert!(matches!(q_exponential(1.0, 0.99, 1e-12, 3), Err(QError::NonConvergence { .. })));
    }
}
