use num_complex::Complex64;
use qosc_core::qcore::{expect_x, oracle_evolve, required_dim, OscillatorParams, QError};

use crate::error::AppError;
use crate::OracleArgs;

/// Agreement required between the two evaluation paths.
pub const ORACLE_TOL: f64 = 1e-8;
pub const ORACLE_SAMPLES: usize = 20;

pub fn run(args: OracleArgs) -> Result<(), AppError> {
    if !(args.t_max > 0.0 && args.t_max.is_finite()) {
        return Err(AppError::Usage(format!("--t-max must be positive, got {}", args.t_max)));
    }
    let params = OscillatorParams::new(args.q, Complex64::new(args.alpha, args.alpha_im))?;
    let required = required_dim(&params)?;
    let dim = args.dim.unwrap_or(required);
    let mut worst = 0.0f64;
    for k in 0..ORACLE_SAMPLES {
        let t = args.t_max * k as f64 / (ORACLE_SAMPLES - 1) as f64;
        let reference = match oracle_evolve(&params, dim, t) {
            Ok((x, _)) => x,
            Err(e @ QError::TruncationInsufficient { .. }) => return Err(AppError::Oracle(e.to_string())),
            Err(e) => return Err(e.into()),
        };
        worst = worst.max((expect_x(&params, t)? - reference).abs());
    }
    println!("q = {}, dim = {dim} (required {required})", args.q);
    println!("max |<X> - oracle| over {ORACLE_SAMPLES} times in [0, {}]: {worst:.3e}", args.t_max);
    if worst < ORACLE_TOL {
        println!("PASS");
        Ok(())
    } else {
        Err(AppError::Oracle(format!("max deviation {worst:.3e} is not below {ORACLE_TOL:e}")))
    }
}
