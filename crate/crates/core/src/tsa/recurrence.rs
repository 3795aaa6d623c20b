use rayon::prelude::*;

use super::embed::{embed, Embedding};
use super::{param, TsaError};
use crate::TimeSeries;

/// Symmetric binary recurrence matrix stored as packed bit rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceMatrix {
    n: usize,
    epsilon: f64,
    words: usize,
    bits: Vec<u64>,
}

impl RecurrenceMatrix {
    fn from_rows(n: usize, epsilon: f64, rows: Vec<Vec<u64>>) -> Self {
        let words = n.div_ceil(64);
        Self { n, epsilon, words, bits: rows.into_iter().flatten().collect() }
    }

    /// Matrix from an explicit list of recurrent pairs; the line of identity
    /// and the mirror of every pair are added.
    pub fn from_pairs(
        n: usize,
        epsilon: f64,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, TsaError> {
        let words = n.div_ceil(64);
        let mut m = Self { n, epsilon, words, bits: vec![0; n * words] };
        for i in 0..n {
            m.set(i, i);
        }
        for (i, j) in pairs {
            if i >= n || j >= n {
                return Err(param(format!("pair ({i}, {j}) outside a {n}x{n} matrix")));
            }
            m.set(i, j);
            m.set(j, i);
        }
        Ok(m)
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn recurrent_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn recurrence_rate(&self) -> f64 {
        self.recurrent_count() as f64 / (self.n * self.n) as f64
    }

    /// Recurrent pairs with `i <= j`, row by row.
    pub fn upper_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (i..self.n).filter(move |&j| self.get(i, j)).map(move |j| (i, j)))
    }

    /// Number of recurrent points on the diagonal `j = i + offset`.
    pub fn diagonal_count(&self, offset: usize) -> usize {
        (0..self.n.saturating_sub(offset)).filter(|&i| self.get(i, i + offset)).count()
    }
}

/// Recurrence matrix of a scalar series in delay coordinates:
/// `R_ij = 1` iff `|x_i - x_j| <= eps`, with `eps` the given fraction of the
/// largest pairwise distance.
pub fn recurrence(
    series: &TimeSeries,
    m: usize,
    delay: usize,
    epsilon_fraction: f64,
) -> Result<RecurrenceMatrix, TsaError> {
    let emb = embed(series, m, delay)?;
    recurrence_from_embedding(&emb, epsilon_fraction)
}

pub fn recurrence_from_embedding(emb: &Embedding, epsilon_fraction: f64) -> Result<RecurrenceMatrix, TsaError> {
    if !(epsilon_fraction > 0.0 && epsilon_fraction < 1.0) {
        return Err(param("epsilon fraction must lie in (0, 1)"));
    }
    let n = emb.len();
    let diameter_sq = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| emb.distance_sq(i, j)).fold(0.0_f64, f64::max))
        .reduce(|| 0.0, f64::max);
    let epsilon = epsilon_fraction * diameter_sq.sqrt();
    let eps_sq = epsilon * epsilon;
    let words = n.div_ceil(64);
    let rows: Vec<Vec<u64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0u64; words];
            for j in 0..n {
                if emb.distance_sq(i, j) <= eps_sq {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
            row
        })
        .collect();
    Ok(RecurrenceMatrix::from_rows(n, epsilon, rows))
}

/// Quantifiers derived from the diagonal texture of a recurrence matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RqaSummary {
    /// Share of off-identity recurrent points lying on diagonal lines of at
    /// least `l_min` points.
    pub determinism: f64,
    /// Coefficient of variation of the offsets between successive strongly
    /// occupied diagonals.
    pub diag_spacing_cv: f64,
    /// Number of distinct spacing values among those offsets.
    pub distinct_spacing_clusters: usize,
}

/// Relative gap that separates two spacing clusters.
const SPACING_CLUSTER_GAP: f64 = 0.1;

pub fn rqa_summary(rm: &RecurrenceMatrix, l_min: usize) -> Result<RqaSummary, TsaError> {
    if l_min < 2 {
        return Err(param("l_min must be >= 2"));
    }
    let n = rm.n();
    if n == 0 {
        return Err(TsaError::EmptyMatrix);
    }

    let per_offset: Vec<(usize, usize)> = (1..n)
        .into_par_iter()
        .map(|k| {
            let mut total = 0;
            let mut on_lines = 0;
            let mut run = 0;
            for i in 0..n - k {
                if rm.get(i, i + k) {
                    run += 1;
                    total += 1;
                } else {
                    if run >= l_min {
                        on_lines += run;
                    }
                    run = 0;
                }
            }
            if run >= l_min {
                on_lines += run;
            }
            (total, on_lines)
        })
        .collect();
    let total: usize = per_offset.iter().map(|p| p.0).sum();
    let on_lines: usize = per_offset.iter().map(|p| p.1).sum();
    let determinism = if total == 0 { 0.0 } else { on_lines as f64 / total as f64 };

    // occupancy of diagonals with at least half the matrix length
    let max_offset = n / 2;
    let occupancy: Vec<f64> = (1..=max_offset).map(|k| per_offset[k - 1].0 as f64 / (n - k) as f64).collect();
    let top = occupancy.iter().cloned().fold(0.0_f64, f64::max);

    let mut centers = vec![0.0];
    if top > 0.0 {
        let mut k = 0;
        while k < occupancy.len() {
            if occupancy[k] >= 0.5 * top {
                let k0 = k;
                let (mut wsum, mut msum) = (0.0, 0.0);
                while k < occupancy.len() && occupancy[k] >= 0.5 * top {
                    wsum += occupancy[k];
                    msum += occupancy[k] * (k + 1) as f64;
                    k += 1;
                }
                // a band touching the main diagonal belongs to offset 0
                if k0 > 0 {
                    centers.push(msum / wsum);
                }
            } else {
                k += 1;
            }
        }
    }
    let mut spacings: Vec<f64> = centers.windows(2).map(|w| w[1] - w[0]).collect();
    let (diag_spacing_cv, distinct_spacing_clusters) = if spacings.is_empty() {
        (0.0, 0)
    } else {
        let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
        let var = spacings.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / spacings.len() as f64;
        spacings.sort_by(f64::total_cmp);
        let clusters = 1 + spacings.windows(2).filter(|w| w[1] - w[0] > SPACING_CLUSTER_GAP * w[0] + 1.0).count();
        (var.sqrt() / mean, clusters)
    };
    Ok(RqaSummary { determinism, diag_spacing_cv, distinct_spacing_clusters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    fn series(n: usize, dt: f64, f: impl Fn(f64) -> f64) -> TimeSeries {
        TimeSeries::new(0.0, dt, (0..n).map(|k| f(k as f64 * dt)).collect()).unwrap()
    }

    #[test]
    fn constant_series_fully_recurrent() {
        let s = series(50, 1.0, |_| 3.0);
        let rm = recurrence(&s, 2, 1, 0.1).unwrap();
        assert_eq!(rm.recurrent_count(), 49 * 49);
    }

    #[test]
    fn symmetric_and_reflexive() {
        let s = series(300, 0.3, |t| t.sin() + 0.3 * (2.7 * t).cos());
        let rm = recurrence(&s, 3, 4, 0.1).unwrap();
        for i in 0..rm.n() {
            assert!(rm.get(i, i));
            for j in 0..rm.n() {
                assert_eq!(rm.get(i, j), rm.get(j, i));
            }
        }
    }

    #[test]
    fn periodic_matrix_rqa() {
        // period of exactly 40 samples
        let s = series(1200, 2.0 * PI / 40.0, f64::sin);
        let rm = recurrence(&s, 2, 10, 0.1).unwrap();
        let r = rqa_summary(&rm, 2).unwrap();
        assert!((r.determinism - 1.0).abs() < 1e-12);
        assert_eq!(r.distinct_spacing_clusters, 1);
        assert!(r.diag_spacing_cv < 0.05);
    }

    #[test]
    fn two_tone_has_several_spacings() {
        let s = series(3000, 0.1, |t| t.sin() + (SQRT_2 * t).sin());
        let rm = recurrence(&s, 4, 6, 0.1).unwrap();
        let r = rqa_summary(&rm, 2).unwrap();
        assert!(r.distinct_spacing_clusters >= 2, "{r:?}");
    }

    #[test]
    fn pairs_round_trip() {
        let s = series(120, 0.2, |t| (0.7 * t).cos());
        let rm = recurrence(&s, 2, 3, 0.15).unwrap();
        let pairs: Vec<_> = rm.upper_pairs().collect();
        let back = RecurrenceMatrix::from_pairs(rm.n(), rm.epsilon(), pairs).unwrap();
        assert_eq!(back, rm);
    }

    #[test]
    fn rejects_bad_input() {
        let s = series(100, 1.0, f64::sin);
        assert!(recurrence(&s, 2, 1, 0.0).is_err());
        assert!(recurrence(&s, 2, 1, 1.0).is_err());
        let empty = RecurrenceMatrix::from_pairs(0, 0.0, []).unwrap();
        assert_eq!(rqa_summary(&empty, 2), Err(TsaError::EmptyMatrix));
        let rm = recurrence(&s, 2, 1, 0.1).unwrap();
        assert!(rqa_summary(&rm, 1).is_err());
    }
}
