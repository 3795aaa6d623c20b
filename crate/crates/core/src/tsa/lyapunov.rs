use rayon::prelude::*;

use super::embed::{embed, Embedding};
use super::{param, TsaError};
use crate::TimeSeries;

/// Neighbours closer than this fraction of the attractor extent are treated
/// as coincident and skipped, so exactly repeating samples do not feed
/// round-off into logarithms.
const COINCIDENT_FRACTION: f64 = 1e-8;
/// Largest spread of local slopes, relative to their mean, inside a linear
/// region.
const SLOPE_SPREAD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LyapunovMethod {
    Rosenstein,
    Wolf,
}

/// Inclusive index range `[start, end]` into a divergence curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitWindow {
    pub start: usize,
    pub end: usize,
}

impl FitWindow {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    /// `(j dt, <ln d(j)>)` for Rosenstein, `(elapsed time, accumulated log
    /// stretch)` for Wolf.
    pub curve: Vec<(f64, f64)>,
    pub fit_window: FitWindow,
    /// Largest Lyapunov exponent per unit time.
    pub lambda_max: f64,
    pub method: LyapunovMethod,
    /// True when no linear region was found and the default window was used.
    pub fallback_fit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RosensteinOptions {
    /// Temporal neighbours with `|i - j| <= theiler` are excluded.
    pub theiler: usize,
    /// Number of steps each neighbour pair is followed.
    pub horizon: usize,
    /// Width in steps of the finite differences used to judge linearity.
    pub smoothing: usize,
    /// Shortest acceptable linear region, in curve points.
    pub min_fit_len: usize,
    /// Manual fit window; overrides the automatic selection.
    pub fit: Option<FitWindow>,
}

impl RosensteinOptions {
    /// Smoothing and minimum fit length default to one Theiler window.
    pub fn new(theiler: usize, horizon: usize) -> Self {
        Self { theiler, horizon, smoothing: theiler.max(1), min_fit_len: theiler.max(3), fit: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WolfOptions {
    pub theiler: usize,
    /// Steps a pair evolves between stretch measurements.
    pub evolve_steps: usize,
    /// Replace the neighbour once its separation exceeds this fraction of
    /// the attractor extent.
    pub replace_threshold: f64,
    /// Largest angle (radians) between old and new separation accepted when
    /// choosing a replacement.
    pub max_angle: f64,
}

impl WolfOptions {
    pub fn new(theiler: usize, evolve_steps: usize, replace_threshold: f64) -> Self {
        Self { theiler, evolve_steps, replace_threshold, max_angle: 0.3 }
    }
}

/// Diagonal of the bounding box of all points.
fn extent(emb: &Embedding) -> f64 {
    let w = emb.width();
    let mut lo = vec![f64::INFINITY; w];
    let mut hi = vec![f64::NEG_INFINITY; w];
    for p in emb.points() {
        for k in 0..w {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
}

/// Nearest neighbour of `i` among indices `< limit` outside the Theiler
/// window and not coincident; ties go to the lower index.
fn nearest(emb: &Embedding, i: usize, limit: usize, theiler: usize, floor_sq: f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..limit {
        if j.abs_diff(i) <= theiler {
            continue;
        }
        let d = emb.distance_sq(i, j);
        if d > floor_sq && best.is_none_or(|(_, b)| d < b) {
            best = Some((j, d));
        }
    }
    best
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Linear region of a divergence curve. Local slopes are finite differences
/// over `smoothing` points; the search covers the initial rise, up to the
/// first non-positive slope, and returns the longest run whose slopes stay
/// within 25% of their mean. The window spans the curve points of that run
/// and must hold at least `min_len` points. Earlier runs win ties.
pub fn select_linear_region(ordinates: &[f64], smoothing: usize, min_len: usize) -> Option<FitWindow> {
    let w = smoothing.max(1);
    if ordinates.len() <= w {
        return None;
    }
    let slopes: Vec<f64> = (0..ordinates.len() - w).map(|a| ordinates[a + w] - ordinates[a]).collect();
    let rise = slopes.iter().position(|&s| !(s > 0.0)).unwrap_or(slopes.len());
    let mut best: Option<(usize, usize)> = None;
    for a in 0..rise {
        let (mut lo, mut hi, mut b) = (slopes[a], slopes[a], a);
        while b + 1 < rise {
            let (lo2, hi2) = (lo.min(slopes[b + 1]), hi.max(slopes[b + 1]));
            if hi2 - lo2 > SLOPE_SPREAD * 0.5 * (hi2 + lo2) {
                break;
            }
            (lo, hi, b) = (lo2, hi2, b + 1);
        }
        if best.is_none_or(|(s, e)| b - a > e - s) {
            best = Some((a, b));
        }
    }
    let (a, b) = best?;
    let window = FitWindow { start: a, end: b + w };
    (window.len() >= min_len).then_some(window)
}

pub fn lyapunov_rosenstein(
    series: &TimeSeries,
    m: usize,
    delay: usize,
    opts: &RosensteinOptions,
) -> Result<LyapunovEstimate, TsaError> {
    let emb = embed(series, m, delay)?;
    lyapunov_rosenstein_embedded(&emb, series.dt(), opts)
}

/// Rosenstein's method on an existing reconstruction sampled every `dt`.
pub fn lyapunov_rosenstein_embedded(
    emb: &Embedding,
    dt: f64,
    opts: &RosensteinOptions,
) -> Result<LyapunovEstimate, TsaError> {
    if opts.horizon < 2 {
        return Err(param("horizon must be >= 2"));
    }
    if emb.len() <= opts.horizon {
        return Err(TsaError::TooShort { len: emb.len(), needed: opts.horizon + 1 });
    }
    let limit = emb.len() - opts.horizon;
    let floor_sq = (COINCIDENT_FRACTION * extent(emb)).powi(2);
    let pairs: Vec<(usize, usize)> = (0..limit)
        .into_par_iter()
        .filter_map(|i| nearest(emb, i, limit, opts.theiler, floor_sq).map(|(j, _)| (i, j)))
        .collect();
    if pairs.is_empty() {
        return Err(TsaError::NoNeighbor);
    }
    let ordinates: Vec<f64> = (0..opts.horizon)
        .into_par_iter()
        .map(|j| {
            let (mut sum, mut count) = (0.0, 0usize);
            for &(a, b) in &pairs {
                let d = emb.distance_sq(a + j, b + j);
                if d > floor_sq {
                    sum += 0.5 * d.ln();
                    count += 1;
                }
            }
            if count == 0 {
                f64::NAN
            } else {
                sum / count as f64
            }
        })
        .collect();
    if ordinates.iter().any(|y| !y.is_finite()) {
        return Err(TsaError::NoNeighbor);
    }
    let curve: Vec<(f64, f64)> = ordinates.iter().enumerate().map(|(j, &y)| (j as f64 * dt, y)).collect();

    let (fit_window, fallback_fit) = match opts.fit {
        Some(w) => {
            if w.end >= curve.len() || w.start >= w.end {
                return Err(param(format!(
                    "fit window {}..={} outside curve of {} points",
                    w.start,
                    w.end,
                    curve.len()
                )));
            }
            (w, false)
        }
        None => match select_linear_region(&ordinates, opts.smoothing, opts.min_fit_len) {
            Some(w) => (w, false),
            None => (FitWindow { start: 1, end: (opts.horizon / 4).max(2) }, true),
        },
    };
    let lambda_max = least_squares_slope(&curve[fit_window.start..=fit_window.end]);
    Ok(LyapunovEstimate { curve, fit_window, lambda_max, method: LyapunovMethod::Rosenstein, fallback_fit })
}

pub fn lyapunov_wolf(
    series: &TimeSeries,
    m: usize,
    delay: usize,
    opts: &WolfOptions,
) -> Result<LyapunovEstimate, TsaError> {
    let emb = embed(series, m, delay)?;
    lyapunov_wolf_embedded(&emb, series.dt(), opts)
}

/// Wolf's fixed-evolution-time algorithm: follow a fiducial trajectory and
/// one neighbour for `evolve_steps`, accumulate the log of the separation
/// ratio, and swap in a new, similarly oriented neighbour once the
/// separation grows past the replacement threshold.
pub fn lyapunov_wolf_embedded(emb: &Embedding, dt: f64, opts: &WolfOptions) -> Result<LyapunovEstimate, TsaError> {
    if opts.evolve_steps == 0 {
        return Err(param("evolve_steps must be >= 1"));
    }
    if !(opts.replace_threshold > 0.0) {
        return Err(param("replace threshold must be positive"));
    }
    let n = emb.len();
    if n <= opts.evolve_steps + opts.theiler + 1 {
        return Err(TsaError::TooShort { len: n, needed: opts.evolve_steps + opts.theiler + 2 });
    }
    let size = extent(emb);
    let floor_sq = (COINCIDENT_FRACTION * size).powi(2);
    let limit = n - opts.evolve_steps;
    let max_sep = opts.replace_threshold * size;
    let cos_min = opts.max_angle.cos();

    let (mut nb, _) = nearest(emb, 0, limit, opts.theiler, floor_sq).ok_or(TsaError::NoNeighbor)?;
    let mut fid = 0;
    let mut stretch = 0.0;
    let mut curve = vec![(0.0, 0.0)];
    while fid + opts.evolve_steps < n && nb + opts.evolve_steps < n {
        let d0 = emb.distance(fid, nb);
        fid += opts.evolve_steps;
        nb += opts.evolve_steps;
        let d1 = emb.distance(fid, nb);
        if d1 * d1 > floor_sq {
            stretch += (d1 / d0).ln();
        }
        curve.push((fid as f64 * dt, stretch));
        if fid >= limit {
            break;
        }
        if d1 > max_sep || d1 * d1 <= floor_sq {
            nb = replacement(emb, fid, nb, limit, opts.theiler, floor_sq, max_sep, cos_min)
                .ok_or(TsaError::NoNeighbor)?;
        }
    }
    if curve.len() < 2 {
        return Err(TsaError::NoNeighbor);
    }
    let (t_end, total) = curve[curve.len() - 1];
    let fit_window = FitWindow { start: 0, end: curve.len() - 1 };
    Ok(LyapunovEstimate {
        curve,
        fit_window,
        lambda_max: total / t_end,
        method: LyapunovMethod::Wolf,
        fallback_fit: false,
    })
}

/// Closest candidate within `max_sep` whose separation from the fiducial
/// point is oriented like the current one; falls back to the nearest point.
#[allow(clippy::too_many_arguments)]
fn replacement(
    emb: &Embedding,
    fid: usize,
    old: usize,
    limit: usize,
    theiler: usize,
    floor_sq: f64,
    max_sep: f64,
    cos_min: f64,
) -> Option<usize> {
    let f = emb.point(fid);
    let dir: Vec<f64> = emb.point(old).iter().zip(f).map(|(a, b)| a - b).collect();
    let dir_norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let max_sq = max_sep * max_sep;
    let mut best: Option<(usize, f64)> = None;
    for j in 0..limit {
        if j.abs_diff(fid) <= theiler {
            continue;
        }
        let d = emb.distance_sq(fid, j);
        if d <= floor_sq || d > max_sq || best.is_some_and(|(_, b)| d >= b) {
            continue;
        }
        let dot: f64 = emb.point(j).iter().zip(f).zip(&dir).map(|((a, b), u)| (a - b) * u).sum();
        if dir_norm > 0.0 && dot / (d.sqrt() * dir_norm) >= cos_min {
            best = Some((j, d));
        }
    }
    best.map(|b| b.0).or_else(|| nearest(emb, fid, limit, theiler, floor_sq).map(|b| b.0))
}
