//! CSV and JSON formats for curves, grids, simulations, fits and trading
//! days. Reals in CSV carry 17 significant digits; JSON uses the shortest
//! representation that reads back to the same double.

use std::fmt::Write as _;
use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::{DayFit, FitBatch, FitResult};
use crate::garch::{GarchParams, SimulationResult};
use crate::ingest::{Rejection, TradingDay};
use crate::qcf::{AsymmetryReport, PPGrid, QcfCurve, QcfError};
use crate::series::{ProbabilityLevel, SeriesError, TimeSeries};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("row {row}: {message}")]
    BadValue { row: usize, message: String },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Qcf(#[from] QcfError),
}

/// Scientific notation with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn curve_to_csv(curve: &QcfCurve) -> String {
    let mut out = String::from("lag,qcf,ci\n");
    let ci = curve.ci_half_width().map(fmt_real).unwrap_or_default();
    for (lag, v) in curve.points() {
        let _ = writeln!(out, "{lag},{},{ci}", fmt_real(v));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct CurveDoc {
    alpha: ProbabilityLevel,
    beta: ProbabilityLevel,
    series_length: usize,
    n_averaged: usize,
    ci_half_width: Option<f64>,
    lags: Vec<i64>,
    values: Vec<f64>,
}

pub fn curve_to_json(curve: &QcfCurve) -> Result<String, FormatError> {
    let doc = CurveDoc {
        alpha: curve.alpha(),
        beta: curve.beta(),
        series_length: curve.series_length(),
        n_averaged: curve.n_averaged(),
        ci_half_width: curve.ci_half_width(),
        lags: curve.lags().to_vec(),
        values: curve.values().to_vec(),
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

/// Reads a curve written by [`curve_to_json`], re-running validation.
pub fn read_curve_json(text: &str) -> Result<QcfCurve, FormatError> {
    let doc: CurveDoc = serde_json::from_str(text)?;
    let curve = QcfCurve::new(
        doc.alpha,
        doc.beta,
        doc.lags,
        doc.values,
        doc.series_length,
        doc.n_averaged,
    )?;
    Ok(match doc.ci_half_width {
        Some(ci) => curve.with_ci(ci),
        None => curve,
    })
}

fn header_index(headers: &csv::StringRecord, name: &str) -> Result<usize, FormatError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| FormatError::MissingColumn(name.to_string()))
}

fn parse_field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    row: usize,
) -> Result<T, FormatError>
where
    T::Err: std::fmt::Display,
{
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|e| FormatError::BadValue {
        row,
        message: format!("'{raw}': {e}"),
    })
}

/// Reads a `lag,qcf,ci` CSV. The file does not record the quantile pair or
/// the series length, so the caller supplies the pair and the curve gets the
/// shortest length compatible with its lags.
pub fn read_curve_csv<R: Read>(
    reader: R,
    alpha: ProbabilityLevel,
    beta: ProbabilityLevel,
) -> Result<QcfCurve, FormatError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let (il, iv) = (
        header_index(&headers, "lag")?,
        header_index(&headers, "qcf")?,
    );
    let ic = headers.iter().position(|h| h == "ci");
    let (mut lags, mut values, mut ci) = (Vec::new(), Vec::new(), None);
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        lags.push(parse_field::<i64>(&rec, il, row + 1)?);
        values.push(parse_field::<f64>(&rec, iv, row + 1)?);
        if let Some(i) = ic.filter(|&i| !rec.get(i).unwrap_or("").is_empty()) {
            ci = Some(parse_field::<f64>(&rec, i, row + 1)?);
        }
    }
    let longest = lags.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0) as usize;
    let curve = QcfCurve::new(alpha, beta, lags, values, 2 * longest + 1, 1)?;
    Ok(match ci {
        Some(c) => curve.with_ci(c),
        None => curve,
    })
}

pub fn grid_to_csv(grid: &PPGrid) -> String {
    let mut out = String::from("alpha\\beta");
    for p in &grid.levels {
        let _ = write!(out, ",{p}");
    }
    out.push('\n');
    for (p, row) in grid.levels.iter().zip(&grid.matrix) {
        out.push_str(&p.to_string());
        for v in row {
            let _ = write!(out, ",{}", fmt_real(*v));
        }
        out.push('\n');
    }
    out
}

pub fn grid_to_json(grid: &PPGrid) -> Result<String, FormatError> {
    Ok(serde_json::to_string_pretty(grid)? + "\n")
}

pub fn simulation_to_csv(sim: &SimulationResult) -> String {
    let mut out = String::from("t,return,variance\n");
    for (t, (r, v)) in sim.returns.values().iter().zip(&sim.variances).enumerate() {
        let _ = writeln!(out, "{t},{},{}", fmt_real(*r), fmt_real(*v));
    }
    out
}

#[derive(Serialize)]
struct SimulationSidecar<'a> {
    params: &'a GarchParams,
    seed: u64,
    burn_in: usize,
    length: usize,
    generator: &'a str,
}

pub fn simulation_sidecar(sim: &SimulationResult) -> Result<String, FormatError> {
    let doc = SimulationSidecar {
        params: &sim.params,
        seed: sim.innovations_seed,
        burn_in: sim.burn_in,
        length: sim.returns.len(),
        generator: &sim.generator,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn params_to_json(params: &GarchParams) -> Result<String, FormatError> {
    Ok(serde_json::to_string_pretty(params)? + "\n")
}

pub fn read_params_json(text: &str) -> Result<GarchParams, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn fit_batch_to_csv(batch: &FitBatch) -> String {
    let mut out = String::from("day,mu,omega,alpha1,beta1,gamma1,loglik,converged\n");
    for f in &batch.fits {
        let p = &f.result.params;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            f.day,
            fmt_real(p.mu),
            fmt_real(p.omega),
            fmt_real(p.alpha1),
            fmt_real(p.beta1),
            fmt_real(p.gamma1),
            fmt_real(f.result.log_likelihood),
            f.result.converged
        );
    }
    out
}

/// Reads the converged rows of a fit CSV back into a batch. Exclusions are
/// not part of the CSV and come back empty.
pub fn read_fit_batch_csv<R: Read>(reader: R) -> Result<FitBatch, FormatError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name| header_index(&headers, name);
    let (day, mu, omega, a, b, g, ll, conv) = (
        col("day")?,
        col("mu")?,
        col("omega")?,
        col("alpha1")?,
        col("beta1")?,
        col("gamma1")?,
        col("loglik")?,
        col("converged")?,
    );
    let mut batch = FitBatch::default();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let params = GarchParams::gjr(
            parse_field(&rec, mu, row)?,
            parse_field(&rec, omega, row)?,
            parse_field(&rec, a, row)?,
            parse_field(&rec, b, row)?,
            parse_field(&rec, g, row)?,
        );
        batch.fits.push(DayFit {
            day: rec.get(day).unwrap_or("").to_string(),
            result: FitResult {
                params,
                log_likelihood: parse_field(&rec, ll, row)?,
                converged: parse_field(&rec, conv, row)?,
                iterations: 0,
                n_obs: 0,
                message: None,
            },
        });
    }
    Ok(batch)
}

pub fn fit_batch_to_json(batch: &FitBatch) -> Result<String, FormatError> {
    Ok(serde_json::to_string_pretty(batch)? + "\n")
}

pub fn day_to_csv(day: &TradingDay) -> String {
    let mut out = String::from("second,price\n");
    for (s, p) in day.prices.iter().enumerate() {
        let _ = writeln!(out, "{s},{}", fmt_real(*p));
    }
    out
}

/// File stem used for a trading day: `<date>_<instrument>`.
pub fn day_file_stem(day: &TradingDay) -> String {
    day.id()
}

/// Splits a `<date>_<instrument>` stem. Stems without a parseable date keep
/// the whole stem as instrument and get the default date.
fn parse_day_stem(stem: &str) -> (NaiveDate, String) {
    stem.split_once('_')
        .and_then(|(d, i)| {
            NaiveDate::parse_from_str(d, "%Y-%m-%d")
                .ok()
                .map(|date| (date, i.to_string()))
        })
        .unwrap_or_else(|| (NaiveDate::default(), stem.to_string()))
}

/// Reads a `second,price` file. Date and instrument come from the file stem;
/// the traded-second count is not stored in the price file and is set to the
/// grid length.
pub fn read_day_csv<R: Read>(reader: R, stem: &str) -> Result<TradingDay, FormatError> {
    match read_series_csv(reader, stem)? {
        SeriesFile::Prices(day) => Ok(day),
        SeriesFile::Returns(_) => Err(FormatError::MissingColumn("price".into())),
    }
}

pub fn rejections_to_csv(rejections: &[Rejection]) -> String {
    let mut out = String::from("date,instrument,reason\n");
    for r in rejections {
        let _ = writeln!(out, "{},{},{}", r.date, r.instrument, r.reason);
    }
    out
}

/// What a numeric input file holds.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesFile {
    /// A `return` or `value` column.
    Returns(TimeSeries),
    /// A `price` column on the one-second grid.
    Prices(TradingDay),
}

/// Reads a single-column numeric CSV, recognizing the `return` column of
/// simulation output, a generic `value` column, or the `price` column of a
/// trading day.
pub fn read_series_csv<R: Read>(reader: R, label: &str) -> Result<SeriesFile, FormatError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let pick = ["return", "value", "price"]
        .iter()
        .find_map(|name| headers.iter().position(|h| h == *name).map(|i| (*name, i)));
    let Some((name, col)) = pick else {
        return Err(FormatError::MissingColumn("return, value or price".into()));
    };
    let mut values = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        values.push(parse_field::<f64>(&rec?, col, row + 1)?);
    }
    if name == "price" {
        let (date, instrument) = parse_day_stem(label);
        Ok(SeriesFile::Prices(TradingDay {
            instrument,
            date,
            traded_seconds: values.len(),
            prices: values,
        }))
    } else {
        Ok(SeriesFile::Returns(TimeSeries::new(values, 1.0, label)?))
    }
}

/// One row of an asymmetry table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymmetryRow {
    pub dataset: String,
    pub year: String,
    pub report: AsymmetryReport,
}

/// Aligned text table with `ΔA` rounded to whole percent.
pub fn asymmetry_table(rows: &[AsymmetryRow]) -> String {
    let w_data = rows
        .iter()
        .map(|r| r.dataset.chars().count())
        .max()
        .unwrap_or(0)
        .max(7);
    let w_year = rows
        .iter()
        .map(|r| r.year.chars().count())
        .max()
        .unwrap_or(0)
        .max(4);
    let mut out = format!("{:<w_data$}  {:<w_year$}  {:>5}\n", "Dataset", "Year", "ΔA");
    for r in rows {
        let pct = format!("{}%", r.report.delta_percent());
        let _ = writeln!(
            out,
            "{:<w_data$}  {:<w_year$}  {:>5}",
            r.dataset, r.year, pct
        );
    }
    out
}

/// Full-precision companion of [`asymmetry_table`].
pub fn asymmetry_csv(rows: &[AsymmetryRow]) -> String {
    let mut out = String::from("dataset,year,area_neg,area_pos,delta,max_lag,degenerate\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.dataset,
            r.year,
            fmt_real(r.report.area_neg),
            fmt_real(r.report.area_pos),
            fmt_real(r.report.delta),
            r.report.max_lag,
            r.report.degenerate
        );
    }
    out
}
