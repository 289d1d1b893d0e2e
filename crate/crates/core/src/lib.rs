//! Quantile correlation analysis of return series.
//!
//! The core pieces are [`quantile::filter_series`], which turns a series into
//! the indicator of observations at or below an empirical quantile, and
//! [`qcf::qcf`], the lagged correlation between two such indicators. Around
//! them sit GARCH-family simulators ([`garch`]), a GJR-GARCH quasi maximum
//! likelihood fitter ([`fit`]), intraday tick preparation ([`ingest`]) and
//! file formats ([`io`]).
//!
//! ```
//! use qcorr::{qcf, ProbabilityLevel, TimeSeries};
//!
//! let x = TimeSeries::from_values(vec![1.0, -5.0, 10.0, 0.0, -6.0, -2.0, -2.0, 2.0, 0.0, 2.0]).unwrap();
//! let median = ProbabilityLevel::new(0.5).unwrap();
//! let curve = qcf(&x, median, median, 2).unwrap();
//! assert_eq!(curve.value_at(0), Some(1.0));
//! ```

pub mod fit;
pub mod garch;
pub mod ingest;
pub mod io;
pub mod qcf;
pub mod quantile;
pub mod series;

pub use fit::{average_params, fit_gjr, fit_per_day, FitBatch, FitError, FitResult};
pub use garch::{simulate, GarchError, GarchParams, ModelKind, SimulationResult};
pub use ingest::{
    build_index, compute_returns, resample_day, IngestError, SessionConfig, TradingDay,
};
pub use qcf::{
    asymmetry, average_curves, confidence_band, pp_grid, qcf, qcf_fast, AsymmetryReport, PPGrid,
    QcfCurve, QcfError,
};
pub use quantile::{empirical_quantile, filter_series, BinarySeries};
pub use series::{ProbabilityLevel, SeriesError, TimeSeries};
