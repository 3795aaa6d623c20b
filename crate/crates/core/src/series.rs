use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("time step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("start time must be finite, got {0}")]
    BadStart(f64),
    #[error("series is empty")]
    Empty,
    #[error("sample {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
}

/// Uniformly sampled real scalar series: `values[k]` is the sample at
/// `t0 + k * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self, SeriesError> {
        if !t0.is_finite() {
            return Err(SeriesError::BadStart(t0));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SeriesError::BadStep(dt));
        }
        if values.is_empty() {
            return Err(SeriesError::Empty);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(SeriesError::NonFinite { index, value });
        }
        Ok(Self { t0, dt, values })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample time of index `k`.
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |k| self.time(k))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Leading `n` samples (or the whole series when shorter).
    pub fn head(&self, n: usize) -> TimeSeries {
        let n = n.min(self.values.len()).max(1);
        TimeSeries { t0: self.t0, dt: self.dt, values: self.values[..n].to_vec() }
    }

    /// Same sampling grid, every value shifted by `c`.
    pub fn shifted(&self, c: f64) -> TimeSeries {
        TimeSeries { t0: self.t0, dt: self.dt, values: self.values.iter().map(|v| v + c).collect() }
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}
