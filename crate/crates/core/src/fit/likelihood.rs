//! Gaussian conditional log-likelihood of a constant-mean GJR-GARCH(1,1).

use std::f64::consts::PI;

use super::FitError;
use crate::garch::{GarchParams, ModelKind};
use crate::series::TimeSeries;

pub const MIN_LIKELIHOOD_LEN: usize = 10;

/// Population variance (divisor `T`).
pub(crate) fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

pub(crate) fn is_constant(values: &[f64]) -> bool {
    values.iter().all(|&v| v == values[0])
}

/// Likelihood kernel without validation. Returns `None` if a variance turns
/// non-positive or non-finite.
pub(crate) fn log_likelihood_unchecked(
    returns: &[f64],
    initial_variance: f64,
    mu: f64,
    omega: f64,
    alpha1: f64,
    beta1: f64,
    gamma1: f64,
) -> Option<f64> {
    let ln_2pi = (2.0 * PI).ln();
    let mut variance = initial_variance;
    let mut acc = 0.0;
    let mut prev_eps: Option<f64> = None;
    for &r in returns {
        if let Some(e) = prev_eps {
            let loading = if e < 0.0 { alpha1 + gamma1 } else { alpha1 };
            variance = omega + loading * e * e + beta1 * variance;
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return None;
        }
        let eps = r - mu;
        acc += ln_2pi + variance.ln() + eps * eps / variance;
        prev_eps = Some(eps);
    }
    Some(-0.5 * acc)
}

/// `-1/2 sum_t [ln(2 pi) + ln sigma2_t + eps_t^2 / sigma2_t]` with
/// `eps_t = r_t - mu`, `sigma2_1` the sample variance of `eps` and the GJR
/// recursion afterwards. Plain GARCH parameters are accepted with
/// `gamma1 = 0`.
pub fn gjr_log_likelihood(returns: &TimeSeries, params: &GarchParams) -> Result<f64, FitError> {
    if returns.len() < MIN_LIKELIHOOD_LEN {
        return Err(FitError::TooShort {
            len: returns.len(),
            min: MIN_LIKELIHOOD_LEN,
        });
    }
    let gamma1 = match params.kind {
        ModelKind::Gjr => params.gamma1,
        ModelKind::Garch => 0.0,
        ModelKind::Egarch => return Err(FitError::WrongModel(params.kind)),
    };
    params.validate()?;
    let r = returns.values();
    if is_constant(r) {
        return Err(FitError::ZeroVariance);
    }
    let initial = population_variance(r);
    log_likelihood_unchecked(
        r,
        initial,
        params.mu,
        params.omega,
        params.alpha1,
        params.beta1,
        gamma1,
    )
    .ok_or(FitError::VarianceBreakdown)
}
