use super::{param, TsaError};
use crate::TimeSeries;

/// Fewest entries into a cell for which a return-time distribution is built.
pub const MIN_VISITS: usize = 30;

/// Gaps between successive entries of a series into a small value cell,
/// with a one-sample Kolmogorov–Smirnov fit to the exponential law
/// `F(t) = (1/tau) exp(-t/tau)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnTimeDistribution {
    pub cell_center: f64,
    pub cell_size: f64,
    pub return_times: Vec<f64>,
    /// Sample mean of `return_times`; the exponential scale.
    pub fitted_mean: f64,
    pub ks_statistic: f64,
    pub p_value: f64,
}

impl ReturnTimeDistribution {
    /// True when the KS test does not reject the exponential law at `level`.
    pub fn exponential_accepted(&self, level: f64) -> bool {
        self.p_value >= level
    }

    /// Fitted exponential density at `t`.
    pub fn density(&self, t: f64) -> f64 {
        (-t / self.fitted_mean).exp() / self.fitted_mean
    }
}

fn in_cell(x: f64, center: f64, size: f64) -> bool {
    (x - center).abs() <= 0.5 * size
}

/// Center of the `cell_size`-wide bin, anchored at the series minimum, that
/// the series enters most often. Ties go to the lowest bin.
pub fn densest_cell(series: &TimeSeries, cell_size: f64) -> Result<f64, TsaError> {
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(param("cell size must be positive"));
    }
    let v = series.values();
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bins = ((hi - lo) / cell_size).floor() as usize + 1;
    let bin = |x: f64| (((x - lo) / cell_size).floor() as usize).min(bins - 1);
    let mut entries = vec![0usize; bins];
    entries[bin(v[0])] += 1;
    for w in v.windows(2) {
        let (a, b) = (bin(w[0]), bin(w[1]));
        if a != b {
            entries[b] += 1;
        }
    }
    let (best, _) = entries.iter().enumerate().fold((0, 0), |acc, (i, &c)| if c > acc.1 { (i, c) } else { acc });
    Ok(lo + (best as f64 + 0.5) * cell_size)
}

pub fn first_return_times(
    series: &TimeSeries,
    cell_center: f64,
    cell_size: f64,
) -> Result<ReturnTimeDistribution, TsaError> {
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(param("cell size must be positive"));
    }
    if !cell_center.is_finite() {
        return Err(param("cell center must be finite"));
    }
    let v = series.values();
    let entries: Vec<usize> = (1..v.len())
        .filter(|&k| in_cell(v[k], cell_center, cell_size) && !in_cell(v[k - 1], cell_center, cell_size))
        .collect();
    if entries.len() < MIN_VISITS {
        return Err(TsaError::InsufficientVisits { visits: entries.len(), needed: MIN_VISITS });
    }
    let dt = series.dt();
    let return_times: Vec<f64> = entries.windows(2).map(|w| (w[1] - w[0]) as f64 * dt).collect();
    let fitted_mean = return_times.iter().sum::<f64>() / return_times.len() as f64;

    let mut sorted = return_times.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let ks_statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let f = -(-t / fitted_mean).exp_m1();
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    let p_value = kolmogorov_pvalue(ks_statistic, sorted.len());
    Ok(ReturnTimeDistribution { cell_center, cell_size, return_times, fitted_mean, ks_statistic, p_value })
}

/// Asymptotic Kolmogorov p-value for statistic `d` from `n` samples, using
/// Stephens' finite-sample scaling of the argument.
pub fn kolmogorov_pvalue(d: f64, n: usize) -> f64 {
    if n == 0 || d <= 0.0 {
        return 1.0;
    }
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
