//! Basic containers: validated time series and probability levels.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("time series needs at least 2 observations, got {0}")]
    TooShort(usize),
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("probability level {0} outside [0, 1]")]
    BadLevel(f64),
}

/// An ordered sequence of finite observations sampled on a uniform grid.
///
/// `step` is informational (seconds per observation) and is carried through
/// to outputs so that lags can be converted back to physical time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    step: f64,
    label: String,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, step: f64, label: impl Into<String>) -> Result<Self, SeriesError> {
        if values.len() < 2 {
            return Err(SeriesError::TooShort(values.len()));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(SeriesError::NonFinite { index, value });
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(SeriesError::BadStep(step));
        }
        Ok(Self {
            values,
            step,
            label: label.into(),
        })
    }

    /// Unit step, empty label.
    pub fn from_values(values: Vec<f64>) -> Result<Self, SeriesError> {
        Self::new(values, 1.0, "")
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

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Applies `f` elementwise. Fails if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, SeriesError> {
        Self::new(
            self.values.iter().map(|&v| f(v)).collect(),
            self.step,
            self.label.clone(),
        )
    }
}

/// A probability level in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ProbabilityLevel(f64);

impl ProbabilityLevel {
    pub fn new(p: f64) -> Result<Self, SeriesError> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(SeriesError::BadLevel(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// True for levels strictly inside `(0, 1)`.
    pub fn is_interior(self) -> bool {
        self.0 > 0.0 && self.0 < 1.0
    }

    /// The 19 levels 0.05, 0.10, ..., 0.95.
    pub fn default_grid() -> Vec<Self> {
        (1..=19).map(|k| Self(f64::from(k) / 20.0)).collect()
    }
}

impl TryFrom<f64> for ProbabilityLevel {
    type Error = SeriesError;

    fn try_from(p: f64) -> Result<Self, Self::Error> {
        Self::new(p)
    }
}

impl From<ProbabilityLevel> for f64 {
    fn from(p: ProbabilityLevel) -> f64 {
        p.0
    }
}

impl fmt::Display for ProbabilityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
