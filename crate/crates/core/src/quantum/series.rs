use crate::error::{Error, Result};

/// Values sampled on a uniform, strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    times: Vec<f64>,
    values: Vec<T>,
}

impl<T> TimeSeries<T> {
    pub fn new(times: Vec<f64>, values: Vec<T>) -> Result<Self> {
        check_grid(&times)?;
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), found: values.len() });
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Grid spacing; zero for a single sample.
    pub fn step(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn map<S>(&self, f: impl FnMut(&T) -> S) -> TimeSeries<S> {
        TimeSeries { times: self.times.clone(), values: self.values.iter().map(f).collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &T)> {
        self.times.iter().copied().zip(&self.values)
    }
}

/// `n` equally spaced times from `start` to `end` inclusive.
pub fn uniform_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let dt = (end - start) / (n - 1) as f64;
            (0..n).map(|k| start + dt * k as f64).collect()
        }
    }
}

/// Rejects empty, non-finite, non-increasing or non-uniform grids.
pub fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::TimeGrid("empty time grid".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::TimeGrid("non-finite time".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::TimeGrid("times must be strictly increasing".into()));
    }
    if times.len() > 2 {
        let span = times[times.len() - 1] - times[0];
        let dt = span / (times.len() - 1) as f64;
        let slack = 1e-9 * span.max(times[0].abs());
        if times.iter().enumerate().any(|(k, t)| (t - times[0] - dt * k as f64).abs() > slack) {
            return Err(Error::TimeGrid("times must be uniformly spaced".into()));
        }
    }
    Ok(())
}
