//! Quantile-based correlation function (qcf).
//!
//! For probability levels `(alpha, beta)` the series is filtered twice with
//! [`filter_series`] and the two binary series are cross-correlated:
//!
//! ```text
//! qcf_l = (1/T) * sum_{t=1}^{T-l} (xa_t - mean_a) (xb_{t+l} - mean_b) / (sd_a * sd_b),   l >= 0
//! qcf_{-l}(alpha, beta) = qcf_l(beta, alpha)
//! ```
//!
//! Means and population standard deviations are taken over the whole filtered
//! series and the sum is divided by `T`, not by the number of overlapping
//! terms. Two evaluation paths are provided: [`qcf`] evaluates the sum
//! literally in `O(T * L)`, [`qcf_fast`] obtains the same values from an FFT
//! cross-correlation in `O(T log T)`.

mod asymmetry;
mod fft;
mod ppgrid;

pub use asymmetry::{asymmetry, asymmetry_up_to, AsymmetryReport};
pub use ppgrid::{average_grids, pp_grid, pp_grid_filtered, PPGrid};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantile::{filter_series, BinarySeries};
use crate::series::{ProbabilityLevel, SeriesError, TimeSeries};

/// Standard score of a two-sided 95% interval.
pub const Z_95: f64 = 1.96;

/// Slack allowed on the `[-1, 1]` range check.
pub const RANGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QcfError {
    #[error("empty input")]
    EmptyInput,
    #[error("degenerate quantile level {level}: filtered series has fraction of ones {fraction}")]
    DegenerateLevel { level: f64, fraction: f64 },
    #[error("max lag {max_lag} must be below half the series length {len}")]
    MaxLagTooLarge { max_lag: usize, len: usize },
    #[error("filtered series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("curves cannot be combined: {0}")]
    Mismatch(String),
    #[error("reference curve has no nonzero lags")]
    NoNonzeroLags,
    #[error("lag grid is not symmetric around zero")]
    AsymmetricLagGrid,
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("quantile level {0} must lie strictly between 0 and 1")]
    LevelNotInterior(f64),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Lagged quantile correlations for one quantile pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcfCurve {
    alpha: ProbabilityLevel,
    beta: ProbabilityLevel,
    lags: Vec<i64>,
    values: Vec<f64>,
    ci_half_width: Option<f64>,
    series_length: usize,
    n_averaged: usize,
}

impl QcfCurve {
    /// Validates lag ordering, the lag bound `2|l| < series_length` and the
    /// value range.
    pub fn new(
        alpha: ProbabilityLevel,
        beta: ProbabilityLevel,
        lags: Vec<i64>,
        values: Vec<f64>,
        series_length: usize,
        n_averaged: usize,
    ) -> Result<Self, QcfError> {
        if lags.is_empty() || lags.len() != values.len() {
            return Err(QcfError::InvalidCurve(format!(
                "{} lags for {} values",
                lags.len(),
                values.len()
            )));
        }
        if lags.windows(2).any(|w| w[0] >= w[1]) {
            return Err(QcfError::InvalidCurve(
                "lags not strictly increasing".into(),
            ));
        }
        if series_length == 0 || n_averaged == 0 {
            return Err(QcfError::InvalidCurve(
                "series length and averaging count must be positive".into(),
            ));
        }
        if let Some(l) = lags
            .iter()
            .find(|l| 2 * l.unsigned_abs() >= series_length as u64)
        {
            return Err(QcfError::InvalidCurve(format!(
                "lag {l} not below half the series length {series_length}"
            )));
        }
        if let Some(v) = values
            .iter()
            .find(|v| v.is_nan() || v.abs() > 1.0 + RANGE_TOLERANCE)
        {
            return Err(QcfError::InvalidCurve(format!("value {v} outside [-1, 1]")));
        }
        Ok(Self {
            alpha,
            beta,
            lags,
            values,
            ci_half_width: None,
            series_length,
            n_averaged,
        })
    }

    pub fn alpha(&self) -> ProbabilityLevel {
        self.alpha
    }

    pub fn beta(&self) -> ProbabilityLevel {
        self.beta
    }

    pub fn lags(&self) -> &[i64] {
        &self.lags
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, lag: i64) -> Option<f64> {
        self.lags.binary_search(&lag).ok().map(|i| self.values[i])
    }

    /// Largest absolute lag on the grid.
    pub fn max_lag(&self) -> u64 {
        self.lags
            .iter()
            .map(|l| l.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn ci_half_width(&self) -> Option<f64> {
        self.ci_half_width
    }

    pub fn series_length(&self) -> usize {
        self.series_length
    }

    pub fn n_averaged(&self) -> usize {
        self.n_averaged
    }

    pub fn with_ci(mut self, half_width: f64) -> Self {
        self.ci_half_width = Some(half_width);
        self
    }

    /// `(lag, value)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.lags.iter().copied().zip(self.values.iter().copied())
    }

    /// Swaps the quantile pair and negates the lag axis. For a single series
    /// this is exactly the curve of `(beta, alpha)`.
    pub fn mirrored(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
            lags: self.lags.iter().rev().map(|l| -l).collect(),
            values: self.values.iter().rev().copied().collect(),
            ci_half_width: self.ci_half_width,
            series_length: self.series_length,
            n_averaged: self.n_averaged,
        }
    }
}

fn check_max_lag(max_lag: usize, len: usize) -> Result<(), QcfError> {
    if 2 * max_lag >= len {
        Err(QcfError::MaxLagTooLarge { max_lag, len })
    } else {
        Ok(())
    }
}

fn check_pair(a: &BinarySeries, b: &BinarySeries) -> Result<(), QcfError> {
    if a.len() != b.len() {
        return Err(QcfError::LengthMismatch(a.len(), b.len()));
    }
    for s in [a, b] {
        if s.is_degenerate() {
            return Err(QcfError::DegenerateLevel {
                level: s.level().value(),
                fraction: s.achieved_fraction(),
            });
        }
    }
    Ok(())
}

/// A filtered series centered on its own mean.
pub(crate) struct Centered {
    values: Vec<f64>,
    /// Population variance, `lag_sum(self, self, 0) / T`.
    variance: f64,
}

impl Centered {
    pub(crate) fn new(s: &BinarySeries) -> Self {
        let raw = s.as_f64();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        let values: Vec<f64> = raw.iter().map(|v| v - mean).collect();
        let variance = lag_sum(&values, &values, 0) / values.len() as f64;
        Self { values, variance }
    }
}

/// `sum_t a_t b_{t+lag}` for `lag >= 0`, accumulated in increasing `t`.
fn lag_sum(a: &[f64], b: &[f64], lag: usize) -> f64 {
    a[..a.len() - lag]
        .iter()
        .zip(&b[lag..])
        .map(|(x, y)| x * y)
        .sum()
}

/// Direct evaluation at one signed lag. Negative lags go through the swap
/// identity so that `(a, b, -l)` and `(b, a, l)` run the identical computation.
pub(crate) fn direct_value(a: &Centered, b: &Centered, lag: i64) -> f64 {
    let n = a.values.len() as f64;
    let norm = (a.variance * b.variance).sqrt();
    let sum = if lag >= 0 {
        lag_sum(&a.values, &b.values, lag as usize)
    } else {
        lag_sum(&b.values, &a.values, lag.unsigned_abs() as usize)
    };
    (sum / n) / norm
}

fn symmetric_lags(max_lag: usize) -> Vec<i64> {
    let l = max_lag as i64;
    (-l..=l).collect()
}

/// Direct evaluation on two prepared binary series, lags `-max_lag..=max_lag`.
pub fn qcf_filtered(
    a: &BinarySeries,
    b: &BinarySeries,
    max_lag: usize,
) -> Result<QcfCurve, QcfError> {
    check_pair(a, b)?;
    check_max_lag(max_lag, a.len())?;
    let (ca, cb) = (Centered::new(a), Centered::new(b));
    let lags = symmetric_lags(max_lag);
    let values = lags.iter().map(|&l| direct_value(&ca, &cb, l)).collect();
    QcfCurve::new(a.level(), b.level(), lags, values, a.len(), 1)
}

/// FFT evaluation on two prepared binary series.
pub fn qcf_fast_filtered(
    a: &BinarySeries,
    b: &BinarySeries,
    max_lag: usize,
) -> Result<QcfCurve, QcfError> {
    check_pair(a, b)?;
    check_max_lag(max_lag, a.len())?;
    let values = fft::qcf_values(a, b, max_lag);
    QcfCurve::new(
        a.level(),
        b.level(),
        symmetric_lags(max_lag),
        values,
        a.len(),
        1,
    )
}

fn filtered_pair(
    x: &TimeSeries,
    alpha: ProbabilityLevel,
    beta: ProbabilityLevel,
    max_lag: usize,
) -> Result<(BinarySeries, BinarySeries), QcfError> {
    check_max_lag(max_lag, x.len())?;
    Ok((filter_series(x, alpha)?, filter_series(x, beta)?))
}

/// Quantile correlation function at lags `-max_lag..=max_lag`, evaluated
/// term by term.
pub fn qcf(
    x: &TimeSeries,
    alpha: ProbabilityLevel,
    beta: ProbabilityLevel,
    max_lag: usize,
) -> Result<QcfCurve, QcfError> {
    let (a, b) = filtered_pair(x, alpha, beta, max_lag)?;
    qcf_filtered(&a, &b, max_lag)
}

/// Same contract as [`qcf`], computed through an FFT cross-correlation.
pub fn qcf_fast(
    x: &TimeSeries,
    alpha: ProbabilityLevel,
    beta: ProbabilityLevel,
    max_lag: usize,
) -> Result<QcfCurve, QcfError> {
    let (a, b) = filtered_pair(x, alpha, beta, max_lag)?;
    qcf_fast_filtered(&a, &b, max_lag)
}

/// Pointwise mean of curves sharing a quantile pair and lag grid.
///
/// Values are summed in input order. The result keeps a confidence half-width
/// only if every input carries the same one.
pub fn average_curves(curves: &[QcfCurve]) -> Result<QcfCurve, QcfError> {
    let first = curves.first().ok_or(QcfError::EmptyInput)?;
    for c in &curves[1..] {
        if c.alpha != first.alpha || c.beta != first.beta {
            return Err(QcfError::Mismatch(format!(
                "quantile pair ({}, {}) vs ({}, {})",
                c.alpha, c.beta, first.alpha, first.beta
            )));
        }
        if c.lags != first.lags {
            return Err(QcfError::Mismatch("lag grids differ".into()));
        }
    }
    let n = curves.len() as f64;
    let values: Vec<f64> = (0..first.values.len())
        .map(|i| curves.iter().map(|c| c.values[i]).sum::<f64>() / n)
        .collect();
    let series_length = curves.iter().map(|c| c.series_length).min().unwrap_or(1);
    let mut out = QcfCurve::new(
        first.alpha,
        first.beta,
        first.lags.clone(),
        values,
        series_length,
        curves.len(),
    )?;
    if curves
        .iter()
        .all(|c| c.ci_half_width == first.ci_half_width)
    {
        out.ci_half_width = first.ci_half_width;
    }
    Ok(out)
}

/// `1.96 * sqrt(mean of squared values over nonzero lags)`.
///
/// Intended for the `(0.5, 0.5)` curve of a dataset: its fluctuations around
/// zero set one band that is shared by every quantile pair of that dataset.
pub fn confidence_band(reference: &QcfCurve) -> Result<f64, QcfError> {
    let (sum_sq, count) = reference
        .points()
        .filter(|&(l, _)| l != 0)
        .fold((0.0, 0usize), |(s, n), (_, v)| (s + v * v, n + 1));
    if count == 0 {
        return Err(QcfError::NoNonzeroLags);
    }
    Ok(Z_95 * (sum_sq / count as f64).sqrt())
}
