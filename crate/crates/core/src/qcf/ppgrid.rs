use serde::{Deserialize, Serialize};

use super::{check_max_lag, check_pair, direct_value, Centered, QcfError, RANGE_TOLERANCE};
use crate::quantile::{filter_series, BinarySeries};
use crate::series::{ProbabilityLevel, TimeSeries};

/// qcf values over a grid of quantile pairs at one fixed lag.
/// Rows index `alpha`, columns index `beta`, both over `levels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PPGrid {
    pub lag: i64,
    pub levels: Vec<ProbabilityLevel>,
    pub matrix: Vec<Vec<f64>>,
    pub series_length: usize,
    pub n_averaged: usize,
}

impl PPGrid {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[row][col]
    }

    pub fn transposed(&self) -> Vec<Vec<f64>> {
        let n = self.levels.len();
        (0..n)
            .map(|j| (0..n).map(|i| self.matrix[i][j]).collect())
            .collect()
    }
}

/// Grid from already filtered series, one per level.
pub fn pp_grid_filtered(filtered: &[BinarySeries], lag: i64) -> Result<PPGrid, QcfError> {
    let first = filtered.first().ok_or(QcfError::EmptyInput)?;
    for s in filtered {
        check_pair(first, s)?;
    }
    check_max_lag(lag.unsigned_abs() as usize, first.len())?;
    let centered: Vec<Centered> = filtered.iter().map(Centered::new).collect();
    let matrix = centered
        .iter()
        .map(|a| centered.iter().map(|b| direct_value(a, b, lag)).collect())
        .collect();
    Ok(PPGrid {
        lag,
        levels: filtered.iter().map(BinarySeries::level).collect(),
        matrix,
        series_length: first.len(),
        n_averaged: 1,
    })
}

/// Probability-probability grid of `x` at a fixed lag.
pub fn pp_grid(x: &TimeSeries, levels: &[ProbabilityLevel], lag: i64) -> Result<PPGrid, QcfError> {
    if let Some(p) = levels.iter().find(|p| !p.is_interior()) {
        return Err(QcfError::LevelNotInterior(p.value()));
    }
    check_max_lag(lag.unsigned_abs() as usize, x.len())?;
    let filtered = levels
        .iter()
        .map(|&p| filter_series(x, p))
        .collect::<Result<Vec<_>, _>>()?;
    pp_grid_filtered(&filtered, lag)
}

/// Entrywise mean of grids sharing lag and levels, summed in input order.
pub fn average_grids(grids: &[PPGrid]) -> Result<PPGrid, QcfError> {
    let first = grids.first().ok_or(QcfError::EmptyInput)?;
    if grids
        .iter()
        .any(|g| g.lag != first.lag || g.levels != first.levels)
    {
        return Err(QcfError::Mismatch("grids differ in lag or levels".into()));
    }
    let n = first.levels.len();
    let count = grids.len() as f64;
    let matrix: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| grids.iter().map(|g| g.matrix[i][j]).sum::<f64>() / count)
                .collect()
        })
        .collect();
    debug_assert!(matrix
        .iter()
        .flatten()
        .all(|v| v.abs() <= 1.0 + RANGE_TOLERANCE));
    Ok(PPGrid {
        lag: first.lag,
        levels: first.levels.clone(),
        matrix,
        series_length: grids.iter().map(|g| g.series_length).min().unwrap_or(1),
        n_averaged: grids.len(),
    })
}
