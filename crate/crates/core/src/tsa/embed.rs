use rayon::prelude::*;

use super::{param, TsaError};
use crate::TimeSeries;

/// Histogram bins per axis for the mutual-information estimate.
pub const AMI_BINS: usize = 32;
/// Kennel distance-ratio threshold for a false neighbour.
pub const FNN_RATIO: f64 = 15.0;
/// Accept the first dimension whose false-neighbour fraction is below this.
pub const FNN_TARGET: f64 = 0.02;
pub const MAX_EMBEDDING_DIM: usize = 10;
/// The false-neighbour search runs on at most this many leading samples.
pub const FNN_MAX_POINTS: usize = 4000;

/// Half-width of the lag window over which an AMI minimum must hold.
pub const AMI_MIN_WINDOW: usize = 3;

const MIN_SELECTION_LEN: usize = 512;

/// Delay-coordinate reconstruction. Each point stacks `dimension` delayed
/// copies of every input channel:
/// `[c0[i], c1[i], .., c0[i+J], c1[i+J], ..]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    dimension: usize,
    delay: usize,
    channels: usize,
    width: usize,
    data: Vec<f64>,
}

impl Embedding {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Coordinates per point (`dimension * channels`).
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.width)
    }

    pub fn distance_sq(&self, i: usize, j: usize) -> f64 {
        self.point(i).iter().zip(self.point(j)).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distance_sq(i, j).sqrt()
    }
}

/// Scalar delay embedding: `vectors[i][k] = values[i + k J]`.
pub fn embed(series: &TimeSeries, m: usize, delay: usize) -> Result<Embedding, TsaError> {
    embed_channels(&[series], m, delay)
}

/// Delay embedding of several simultaneously sampled channels.
pub fn embed_channels(channels: &[&TimeSeries], m: usize, delay: usize) -> Result<Embedding, TsaError> {
    if m == 0 || delay == 0 {
        return Err(param("embedding dimension and delay must be >= 1"));
    }
    let first = channels.first().ok_or_else(|| param("no channels to embed"))?;
    let len = first.len();
    if channels.iter().any(|c| c.len() != len) {
        return Err(param("channels differ in length"));
    }
    let span = (m - 1) * delay;
    if len <= span {
        return Err(TsaError::TooShort { len, needed: span + 1 });
    }
    let count = len - span;
    let width = m * channels.len();
    let mut data = Vec::with_capacity(count * width);
    for i in 0..count {
        for k in 0..m {
            for c in channels {
                data.push(c.values()[i + k * delay]);
            }
        }
    }
    Ok(Embedding { dimension: m, delay, channels: channels.len(), width, data })
}

/// Histogram estimate (natural log) of the mutual information between
/// `x[t]` and `x[t + lag]`, `bins` equal-width bins over the sample range.
pub fn average_mutual_information(values: &[f64], lag: usize, bins: usize) -> f64 {
    if lag >= values.len() || bins == 0 {
        return 0.0;
    }
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = hi - lo;
    if !(span > 0.0) {
        return 0.0;
    }
    let bin = |v: f64| (((v - lo) / span * bins as f64) as usize).min(bins - 1);
    let n = values.len() - lag;
    let mut joint = vec![0u32; bins * bins];
    let mut pa = vec![0u32; bins];
    let mut pb = vec![0u32; bins];
    for t in 0..n {
        let a = bin(values[t]);
        let b = bin(values[t + lag]);
        joint[a * bins + b] += 1;
        pa[a] += 1;
        pb[b] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            let c = joint[a * bins + b];
            if c > 0 {
                let pab = c as f64 / nf;
                mi += pab * (pab / (pa[a] as f64 / nf * pb[b] as f64 / nf)).ln();
            }
        }
    }
    mi
}

fn first_autocorrelation_zero(values: &[f64], max_lag: usize) -> Option<usize> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    if !(var > 0.0) {
        return None;
    }
    (1..max_lag).find(|&lag| {
        let c: f64 = (0..n - lag).map(|t| (values[t] - mean) * (values[t + lag] - mean)).sum();
        c <= 0.0
    })
}

/// Delay at the first local minimum of the average mutual information,
/// falling back to the first zero of the autocorrelation.
pub fn choose_delay(series: &TimeSeries) -> Result<usize, TsaError> {
    let values = series.values();
    if values.len() < MIN_SELECTION_LEN {
        return Err(TsaError::TooShort { len: values.len(), needed: MIN_SELECTION_LEN });
    }
    let max_lag = values.len() / 4;
    let ami: Vec<f64> =
        (0..=max_lag).into_par_iter().map(|lag| average_mutual_information(values, lag, AMI_BINS)).collect();
    // binning makes the curve jagged, so a minimum must hold over a few lags
    let minimum = (2..max_lag.saturating_sub(AMI_MIN_WINDOW)).find(|&l| {
        let lo = l.saturating_sub(AMI_MIN_WINDOW);
        ami[l] < ami[l - 1] && ami[lo..=l + AMI_MIN_WINDOW].iter().all(|&a| ami[l] <= a)
    });
    match minimum {
        Some(lag) => Ok(lag),
        None => first_autocorrelation_zero(values, max_lag).ok_or(TsaError::NoDelay),
    }
}

/// Fraction of nearest neighbours in `m` dimensions that separate by more
/// than [`FNN_RATIO`] times their distance when the `(m+1)`-th delay
/// coordinate is added. Neighbours closer in time than `delay` samples are
/// skipped.
pub fn false_neighbor_fraction(values: &[f64], m: usize, delay: usize) -> f64 {
    if values.len() <= m * delay + 1 {
        return 1.0;
    }
    let n = values.len() - m * delay;
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    // repeats of the same state up to round-off are not neighbours
    let floor_sq = (1e-8 * (hi - lo)).powi(2) * m as f64;
    let dist_sq = |i: usize, j: usize| -> f64 {
        (0..m)
            .map(|k| {
                let d = values[i + k * delay] - values[j + k * delay];
                d * d
            })
            .sum()
    };
    let (false_count, total) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = f64::INFINITY;
            let mut best_j = usize::MAX;
            for j in 0..n {
                if i.abs_diff(j) <= delay {
                    continue;
                }
                let d = dist_sq(i, j);
                if d > floor_sq && d < best {
                    best = d;
                    best_j = j;
                }
            }
            if best_j == usize::MAX {
                return (0usize, 0usize);
            }
            let extra = (values[i + m * delay] - values[best_j + m * delay]).abs();
            ((extra > FNN_RATIO * best.sqrt()) as usize, 1usize)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if total == 0 {
        1.0
    } else {
        false_count as f64 / total as f64
    }
}

/// Smallest `m <= 10` whose false-nearest-neighbour fraction is below 2 %,
/// or 10 when none is.
pub fn choose_dimension(series: &TimeSeries, delay: usize) -> Result<usize, TsaError> {
    let values = series.values();
    if values.len() < MIN_SELECTION_LEN {
        return Err(TsaError::TooShort { len: values.len(), needed: MIN_SELECTION_LEN });
    }
    if delay == 0 {
        return Err(param("delay must be >= 1"));
    }
    let values = &values[..values.len().min(FNN_MAX_POINTS)];
    Ok((1..=MAX_EMBEDDING_DIM)
        .find(|&m| false_neighbor_fraction(values, m, delay) < FNN_TARGET)
        .unwrap_or(MAX_EMBEDDING_DIM))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(n: usize, dt: f64) -> TimeSeries {
        TimeSeries::new(0.0, dt, (0..n).map(|k| (k as f64 * dt).sin()).collect()).unwrap()
    }

    #[test]
    fn identity_embedding() {
        let s = TimeSeries::new(0.0, 1.0, vec![3.0, 1.0, 4.0, 1.0, 5.0]).unwrap();
        let e = embed(&s, 1, 1).unwrap();
        assert_eq!(e.len(), 5);
        let pts: Vec<f64> = e.points().map(|p| p[0]).collect();
        assert_eq!(pts, s.values());
    }

    #[test]
    fn layout_and_count() {
        let s = TimeSeries::new(0.0, 1.0, (0..20).map(|k| k as f64).collect()).unwrap();
        let e = embed(&s, 3, 4).unwrap();
        assert_eq!(e.len(), 20 - 2 * 4);
        for i in 0..e.len() {
            for k in 0..3 {
                assert_eq!(e.point(i)[k], s.values()[i + 4 * k]);
            }
        }
    }

    #[test]
    fn quarter_period_delay_gives_circle() {
        let dt = 2.0 * PI / 64.0;
        let e = embed(&sine(1000, dt), 2, 16).unwrap();
        for p in e.points() {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((r - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn too_short_series() {
        let s = TimeSeries::new(0.0, 1.0, vec![0.0; 10]).unwrap();
        assert_eq!(embed(&s, 4, 4), Err(TsaError::TooShort { len: 10, needed: 13 }));
    }

    #[test]
    fn channel_embedding_interleaves() {
        let a = TimeSeries::new(0.0, 1.0, vec![1.0, 2.0, 3.0]).unwrap();
        let b = TimeSeries::new(0.0, 1.0, vec![10.0, 20.0, 30.0]).unwrap();
        let e = embed_channels(&[&a, &b], 2, 1).unwrap();
        assert_eq!(e.width(), 4);
        assert_eq!(e.point(0), &[1.0, 10.0, 2.0, 20.0]);
        assert_eq!(e.point(1), &[2.0, 20.0, 3.0, 30.0]);
    }

    #[test]
    fn sine_delay_is_quarter_period() {
        // 64 samples per period up to an irrational detuning, so the samples
        // do not sit on a fixed phase lattice
        let dt = 2.0 * PI / (64.0 + 1.0 / std::f64::consts::SQRT_2);
        let s = sine(16384, dt);
        let lag = choose_delay(&s).unwrap();
        assert!((14..=18).contains(&lag), "lag {lag}");
        // direct check: AMI at the chosen lag is below its neighbours at +-8
        let v = s.values();
        let at = average_mutual_information(v, lag, AMI_BINS);
        assert!(at < average_mutual_information(v, lag - 8, AMI_BINS));
        assert!(at < average_mutual_information(v, lag + 8, AMI_BINS));
    }

    #[test]
    fn lattice_sine_delay_minimizes_ami() {
        // exactly 64 samples per period: the AMI is flat between roughly
        // 1/6 and 3/8 of a period and its smallest value sits early on that
        // plateau
        let dt = 2.0 * PI / 64.0;
        let s = sine(4096, dt);
        let lag = choose_delay(&s).unwrap();
        let v = s.values();
        let at = average_mutual_information(v, lag, AMI_BINS);
        let best = (2..32).map(|l| average_mutual_information(v, l, AMI_BINS)).fold(f64::INFINITY, f64::min);
        assert!((at - best).abs() < 1e-12, "lag {lag}");
    }

    #[test]
    fn constant_series_has_no_delay() {
        let s = TimeSeries::new(0.0, 1.0, vec![2.5; 600]).unwrap();
        assert_eq!(choose_delay(&s), Err(TsaError::NoDelay));
    }

    #[test]
    fn sine_needs_two_dimensions() {
        let dt = 2.0 * PI / 64.0;
        let s = sine(2000, dt);
        assert_eq!(choose_dimension(&s, 16).unwrap(), 2);
    }

    #[test]
    fn noise_dimension_is_small() {
        // independent samples: the ratio test alone stops flagging neighbours
        // once the nearest-neighbour distance grows with m
        let mut x = 0.123_f64;
        let v: Vec<f64> = (0..2000)
            .map(|_| {
                x = (x * 9301.0 + 0.49297).fract();
                x
            })
            .collect();
        let s = TimeSeries::new(0.0, 1.0, v).unwrap();
        let m = choose_dimension(&s, 1).unwrap();
        assert!((1..=MAX_EMBEDDING_DIM).contains(&m));
        let v = &s.values()[..FNN_MAX_POINTS.min(s.len())];
        assert!(false_neighbor_fraction(v, m, 1) < FNN_TARGET || m == MAX_EMBEDDING_DIM);
    }
}
