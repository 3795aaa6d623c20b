//! Property-based checks of invariants that span modules.

use crate::qcore::{
    autocorrelation, check_amplitude_limit, coherent_coefficients, expect_x, oracle_evolve, q_bracket, required_dim,
    FockMatrixSystem, OscillatorParams,
};
use crate::regime::{classify, FeatureVector, Regime};
use crate::tsa::{first_return_times, power_spectrum, recurrence, RecurrenceMatrix};
use crate::TimeSeries;
use num_complex::Complex64;
use proptest::prelude::*;

/// A `(q, alpha)` pair the closed form can evaluate: `|alpha|^2` is drawn as a
/// fraction of the q-exponential radius `1/(1-q^2)`, which is tighter than the
/// amplitude limit, and kept away from it so truncation stays modest.
fn admissible() -> impl Strategy<Value = OscillatorParams> {
    (0.05f64..0.99, 0.0f64..0.8, 0.0f64..std::f64::consts::TAU).prop_map(|(q, frac, phase)| {
        let r = (frac / (1.0 - q * q)).sqrt().min(1.5);
        OscillatorParams::new(q, Complex64::from_polar(r, phase)).unwrap()
    })
}

fn series(values: Vec<f64>) -> TimeSeries {
    TimeSeries::new(0.0, 0.1, values).unwrap()
}

fn feature_vector() -> impl Strategy<Value = FeatureVector> {
    (-0.05f64..0.2, 0.0f64..2.0, 0usize..5, 0usize..4, any::<bool>()).prop_map(|(l, a, p, c, partial)| FeatureVector {
        lambda_max: l,
        lambda_wolf: l * (1.0 + a),
        lambda_agreement: a,
        peak_count: p,
        diag_spacing_clusters: c,
        determinism: 0.99,
        ks_exponential_pass: false,
        partial,
        failures: Vec::new(),
    })
}

fn assert_same_matrix(a: &RecurrenceMatrix, b: &RecurrenceMatrix) {
    assert_eq!(a.n(), b.n());
    assert_eq!(a.epsilon(), b.epsilon());
    assert!(a.upper_pairs().eq(b.upper_pairs()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_recursion(n in 0u32..200, q in 0.1f64..0.99) {
        let lhs = q_bracket(n + 1, q).unwrap();
        let rhs = 1.0 + q * q * q_bracket(n, q).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs);
    }

    #[test]
    fn lowering_expectation_is_alpha(params in admissible()) {
        let state = coherent_coefficients(&params).unwrap();
        prop_assert!((state.lowering_expectation() - params.alpha()).norm() < 1e-8);
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn closed_form_matches_fock_evolution(params in admissible(), t in 0.0f64..100.0) {
        let dim = required_dim(&params).unwrap();
        let (x, _) = oracle_evolve(&params, dim, t).unwrap();
        prop_assert!((expect_x(&params, t).unwrap() - x).abs() < 1e-8);
    }

    #[test]
    fn evolution_conserves_norm(q in 0.05f64..1.0, dim in 2usize..40, t in 0.0f64..200.0, seed in any::<u64>()) {
        let system = FockMatrixSystem::new(q, dim).unwrap();
        let mut s = seed | 1;
        let mut psi: Vec<Complex64> = (0..dim).map(|_| {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            Complex64::from_polar(1.0, (s % 6283) as f64 / 1000.0) / (1.0 + (s % 7) as f64)
        }).collect();
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|c| *c /= norm);
        let evolved = system.evolve(&psi, t);
        prop_assert!((evolved.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn undeformed_reduction(re in -2.0f64..2.0, im in -2.0f64..2.0, t in -50.0f64..50.0) {
        let alpha = Complex64::new(re, im);
        let params = OscillatorParams::new(1.0, alpha).unwrap();
        let expected = std::f64::consts::SQRT_2 * (alpha * Complex64::from_polar(1.0, -t)).re;
        prop_assert!((expect_x(&params, t).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn autocorrelation_bounded(params in admissible(), t in 0.0f64..100.0) {
        prop_assert!(autocorrelation(&params, t).unwrap().norm() <= 1.0 + 1e-10);
    }

    #[test]
    fn admissibility_is_monotone_in_q(q in 0.01f64..1.0, dq in 0.0f64..1.0, alpha in 0.0f64..5.0) {
        let q2 = q + dq * (1.0 - q);
        if check_amplitude_limit(q, Complex64::new(alpha, 0.0)) {
            prop_assert!(check_amplitude_limit(q2, Complex64::new(alpha, 0.0)));
        }
    }

    #[test]
    fn recurrence_symmetric_and_reflexive(values in prop::collection::vec(-1.0f64..1.0, 10..300), m in 1usize..4, eps in 0.01f64..0.9) {
        let rm = recurrence(&series(values), m, 1, eps).unwrap();
        for i in 0..rm.n() {
            prop_assert!(rm.get(i, i));
            for j in 0..i {
                prop_assert_eq!(rm.get(i, j), rm.get(j, i));
            }
        }
    }

    // dyadic samples and an integer shift keep every distance exact
    #[test]
    fn recurrence_shift_invariant(ks in prop::collection::vec(-(1i32 << 16)..(1 << 16), 20..200), c in -1000i32..1000) {
        let values: Vec<f64> = ks.iter().map(|&k| k as f64 / 1024.0).collect();
        let shifted: Vec<f64> = values.iter().map(|v| v + c as f64).collect();
        let a = recurrence(&series(values), 2, 3, 0.2).unwrap();
        let b = recurrence(&series(shifted), 2, 3, 0.2).unwrap();
        assert_same_matrix(&a, &b);
    }

    #[test]
    fn spectrum_shift_invariant(values in prop::collection::vec(-1.0f64..1.0, 64..600), c in -100.0f64..100.0) {
        let a = power_spectrum(&series(values.clone())).unwrap();
        let b = power_spectrum(&series(values.iter().map(|v| v + c).collect())).unwrap();
        let scale = a.power.iter().sum::<f64>() + 1e-300;
        for (pa, pb) in a.power.iter().zip(&b.power).skip(1) {
            prop_assert!((pa - pb).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn parseval(values in prop::collection::vec(-10.0f64..10.0, 64..1500), dt in 0.01f64..2.0) {
        let n = values.len();
        let s = TimeSeries::new(0.0, dt, values).unwrap();
        let spec = power_spectrum(&s).unwrap();
        let mean = s.mean();
        let var = s.values().iter().enumerate().map(|(k, v)| {
            let w = 0.5 * (1.0 - (std::f64::consts::TAU * k as f64 / n as f64).cos());
            ((v - mean) * w).powi(2)
        }).sum::<f64>() / n as f64;
        prop_assert!((spec.total_power() - var).abs() <= 1e-6 * var);
    }

    #[test]
    fn fitted_mean_is_sample_mean(period in 20usize..200, n in 5000usize..20000) {
        let s = series((0..n).map(|k| (std::f64::consts::TAU * k as f64 / period as f64 + 0.3).sin()).collect());
        if let Ok(r) = first_return_times(&s, 0.0, 0.05) {
            let mean = r.return_times.iter().sum::<f64>() / r.return_times.len() as f64;
            prop_assert_eq!(mean, r.fitted_mean);
        }
    }

    #[test]
    fn classify_is_pure(f in feature_vector(), thr in 0.001f64..0.1) {
        let a = classify(&f, thr).unwrap();
        let b = classify(&f.clone(), thr).unwrap();
        prop_assert_eq!(a, b);
    }

    // moving the threshold by up to 20% relabels only points inside the band
    #[test]
    fn label_stable_outside_threshold_band(f in feature_vector(), thr in 0.002f64..0.05, scale in 0.8f64..1.2) {
        let a = classify(&f, thr).unwrap().label;
        let b = classify(&f, thr * scale).unwrap().label;
        if a != b {
            let (lo, hi) = (0.8 * thr, 1.2 * thr);
            prop_assert!(f.lambda_max >= lo && f.lambda_max <= hi, "{a:?} -> {b:?} at lambda {}", f.lambda_max);
            prop_assert!(a != Regime::Indeterminate);
        }
    }
}
