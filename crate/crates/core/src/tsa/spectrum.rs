use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{param, TsaError};
use crate::TimeSeries;

pub const MIN_SPECTRUM_LEN: usize = 64;
/// A spectral line must complete at least this many cycles within the record
/// to count as a resolved period; slower content is indistinguishable from a
/// trend and is ignored by the peak counter.
pub const MIN_RESOLVED_CYCLES: usize = 3;

/// One-sided periodogram. `power` is a density: `sum(power) * df` equals the
/// variance of the de-meaned, tapered series.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
    pub window: &'static str,
}

impl Spectrum {
    /// Bin spacing `1 / (N dt)`.
    pub fn resolution(&self) -> f64 {
        self.frequencies.get(1).copied().unwrap_or(0.0)
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.resolution()
    }

    /// Amplitude spectrum `sqrt(power)`.
    pub fn amplitude(&self) -> Vec<f64> {
        self.power.iter().map(|p| p.sqrt()).collect()
    }
}

fn hann(n: usize) -> impl Iterator<Item = f64> {
    let scale = 2.0 * std::f64::consts::PI / n as f64;
    (0..n).map(move |k| 0.5 * (1.0 - (scale * k as f64).cos()))
}

/// De-meaned, Hann-tapered samples.
pub(crate) fn tapered(series: &TimeSeries) -> Vec<f64> {
    let mean = series.mean();
    series.values().iter().zip(hann(series.len())).map(|(v, w)| (v - mean) * w).collect()
}

/// One-sided Hann-windowed periodogram from frequency 0 to Nyquist.
pub fn power_spectrum(series: &TimeSeries) -> Result<Spectrum, TsaError> {
    let n = series.len();
    if n < MIN_SPECTRUM_LEN {
        return Err(TsaError::TooShort { len: n, needed: MIN_SPECTRUM_LEN });
    }
    let dt = series.dt();
    let mut buf: Vec<Complex64> = tapered(series).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let bins = n / 2 + 1;
    let scale = dt / n as f64;
    let df = 1.0 / (n as f64 * dt);
    let power = (0..bins)
        .map(|k| {
            let p = buf[k].norm_sqr() * scale;
            // interior bins carry their negative-frequency mirror
            if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    let frequencies = (0..bins).map(|k| k as f64 * df).collect();
    Ok(Spectrum { frequencies, power, window: "hann" })
}

/// Prominence of the local maximum at `i`: height above the higher of the
/// two lowest points reached before climbing to a taller value (or the edge
/// of `lo..len`).
fn prominence(values: &[f64], lo: usize, i: usize) -> f64 {
    let h = values[i];
    let mut left_min = h;
    for &v in values[lo..i].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &values[i + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Number of spectral lines whose prominence in the amplitude spectrum is at
/// least `prominence_fraction` of the largest amplitude. Bins below
/// [`MIN_RESOLVED_CYCLES`] cycles per record are skipped.
pub fn spectral_peak_count(spec: &Spectrum, prominence_fraction: f64) -> Result<usize, TsaError> {
    if !(prominence_fraction > 0.0 && prominence_fraction < 1.0) {
        return Err(param("prominence fraction must lie in (0, 1)"));
    }
    let amp = spec.amplitude();
    let lo = MIN_RESOLVED_CYCLES;
    if amp.len() < lo + 3 {
        return Ok(0);
    }
    let top = amp[lo..].iter().cloned().fold(0.0_f64, f64::max);
    if !(top > 0.0) {
        return Ok(0);
    }
    let threshold = prominence_fraction * top;
    Ok((lo + 1..amp.len() - 1)
        .filter(|&i| amp[i] > amp[i - 1] && amp[i] >= amp[i + 1])
        .filter(|&i| prominence(&amp, lo, i) >= threshold)
        .count())
}

/// Period, in samples, of the strongest resolved spectral line.
pub fn dominant_period(series: &TimeSeries) -> Result<f64, TsaError> {
    let spec = power_spectrum(series)?;
    let lo = MIN_RESOLVED_CYCLES.min(spec.power.len() - 1);
    let k = (lo..spec.power.len()).max_by(|&a, &b| spec.power[a].total_cmp(&spec.power[b])).unwrap_or(lo).max(1);
    Ok(series.len() as f64 / k as f64)
}

/// Mean period in samples: the reciprocal of the power-weighted mean
/// frequency, excluding the zero bin.
pub fn mean_period(series: &TimeSeries) -> Result<f64, TsaError> {
    let spec = power_spectrum(series)?;
    let (mut moment, mut total) = (0.0, 0.0);
    for (k, &p) in spec.power.iter().enumerate().skip(1) {
        moment += k as f64 * p;
        total += p;
    }
    if !(total > 0.0) {
        return Err(param("series has no variance"));
    }
    Ok(series.len() as f64 * total / moment)
}
