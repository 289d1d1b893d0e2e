use serde::{Deserialize, Serialize};

use super::{QcfCurve, QcfError};

/// Absolute areas under a curve on each side of lag zero and their
/// normalized difference `(A- - A+) / (A- + A+)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryReport {
    pub area_neg: f64,
    pub area_pos: f64,
    pub delta: f64,
    pub max_lag: u64,
    /// Both areas were zero and `delta` was set to 0.
    pub degenerate: bool,
}

impl AsymmetryReport {
    /// `delta` as a whole percentage, as printed in reports.
    pub fn delta_percent(&self) -> i64 {
        (self.delta * 100.0).round() as i64
    }
}

/// Asymmetry over the curve's full lag range.
pub fn asymmetry(curve: &QcfCurve) -> Result<AsymmetryReport, QcfError> {
    asymmetry_up_to(curve, curve.max_lag())
}

/// Asymmetry using only lags with `1 <= |l| <= max_lag`.
pub fn asymmetry_up_to(curve: &QcfCurve, max_lag: u64) -> Result<AsymmetryReport, QcfError> {
    let lags = curve.lags();
    let n = lags.len();
    if n.is_multiple_of(2) || (0..n).any(|i| lags[i] != -lags[n - 1 - i]) {
        return Err(QcfError::AsymmetricLagGrid);
    }
    if max_lag == 0 || max_lag > curve.max_lag() {
        return Err(QcfError::InvalidCurve(format!(
            "asymmetry lag limit {max_lag} outside 1..={}",
            curve.max_lag()
        )));
    }
    let centre = n / 2;
    let values = curve.values();
    let mut area_neg = 0.0;
    let mut area_pos = 0.0;
    // Walk outwards from lag zero so both sides accumulate in the same |l| order.
    for k in 1..=centre {
        if lags[centre + k].unsigned_abs() > max_lag {
            break;
        }
        area_pos += values[centre + k].abs();
        area_neg += values[centre - k].abs();
    }
    let total = area_neg + area_pos;
    let (delta, degenerate) = if total > 0.0 {
        ((area_neg - area_pos) / total, false)
    } else {
        log::warn!("both asymmetry areas are zero; reporting delta = 0");
        (0.0, true)
    };
    Ok(AsymmetryReport {
        area_neg,
        area_pos,
        delta,
        max_lag,
        degenerate,
    })
}
