use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use qcorr::io::{read_series_csv, SeriesFile};
use qcorr::{compute_returns, ProbabilityLevel, SimulationResult, TimeSeries};
use rayon::prelude::*;

use crate::args::ReturnArgs;
use crate::error::CliError;

/// Where a batch of series came from. Decides default lags for grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Returns,
    /// Price files on the one-second grid, turned into returns whose step
    /// is `stride` seconds.
    Prices {
        stride: usize,
    },
}

#[derive(Debug)]
pub struct Loaded {
    pub series: Vec<TimeSeries>,
    pub kind: SourceKind,
}

pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// A single file, or the `.csv` and `.json` files of a directory in name
/// order. Simulation sidecars (`*.meta.json`) are skipped.
pub fn list_files(input: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !input.exists() {
        return Err(CliError::config(format!(
            "input {} does not exist",
            input.display()
        )));
    }
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(input)
        .map_err(|e| CliError::io(input, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && !p.to_string_lossy().ends_with(".meta.json")
                && p.extension().is_some_and(|e| {
                    e.eq_ignore_ascii_case("csv") || e.eq_ignore_ascii_case("json")
                })
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::config(format!(
            "directory {} holds no .csv or .json files",
            input.display()
        )));
    }
    Ok(files)
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn read_one(path: &Path) -> Result<SeriesFile, CliError> {
    let label = stem(path);
    if is_json(path) {
        let sim: SimulationResult = serde_json::from_str(&read_text(path)?)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let step = sim.returns.step();
        return Ok(SeriesFile::Returns(TimeSeries::new(
            sim.returns.into_values(),
            step,
            label,
        )?));
    }
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_series_csv(BufReader::new(file), &label)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Reads every series under `input`. Price files become simple returns with
/// the given horizon and stride; all files must be of one kind.
pub fn load_series(
    input: &Path,
    returns: &ReturnArgs,
    default_stride: usize,
) -> Result<Loaded, CliError> {
    let files = list_files(input)?;
    let parsed: Vec<SeriesFile> = files
        .par_iter()
        .map(|p| read_one(p))
        .collect::<Result<_, _>>()?;
    let stride = returns.stride.unwrap_or(default_stride);
    if returns.horizon == 0 || stride == 0 {
        return Err(CliError::config("--horizon and --stride must be positive"));
    }
    let prices = parsed
        .iter()
        .filter(|f| matches!(f, SeriesFile::Prices(_)))
        .count();
    if prices != 0 && prices != parsed.len() {
        return Err(CliError::config(
            "input mixes price files and return series",
        ));
    }
    if prices == 0 {
        let series = parsed
            .into_iter()
            .filter_map(|f| match f {
                SeriesFile::Returns(s) => Some(s),
                SeriesFile::Prices(_) => None,
            })
            .collect();
        return Ok(Loaded {
            series,
            kind: SourceKind::Returns,
        });
    }
    let series = parsed
        .par_iter()
        .filter_map(|f| match f {
            SeriesFile::Prices(day) => Some(day),
            SeriesFile::Returns(_) => None,
        })
        .map(|day| compute_returns(day, returns.horizon, stride).map_err(CliError::from))
        .collect::<Result<_, _>>()?;
    Ok(Loaded {
        series,
        kind: SourceKind::Prices { stride },
    })
}

pub fn level(p: f64) -> Result<ProbabilityLevel, CliError> {
    match ProbabilityLevel::new(p) {
        Ok(level) if level.is_interior() => Ok(level),
        _ => Err(CliError::config(format!(
            "probability level {p} must lie strictly inside (0, 1)"
        ))),
    }
}

pub const DEFAULT_PAIRS: [(f64, f64); 6] = [
    (0.05, 0.05),
    (0.5, 0.5),
    (0.95, 0.95),
    (0.05, 0.5),
    (0.5, 0.95),
    (0.05, 0.95),
];

pub fn resolve_pairs(
    alpha: &[f64],
    beta: &[f64],
) -> Result<Vec<(ProbabilityLevel, ProbabilityLevel)>, CliError> {
    if alpha.len() != beta.len() {
        return Err(CliError::config(format!(
            "{} --alpha values for {} --beta values",
            alpha.len(),
            beta.len()
        )));
    }
    let raw: Vec<(f64, f64)> = if alpha.is_empty() {
        DEFAULT_PAIRS.to_vec()
    } else {
        alpha.iter().copied().zip(beta.iter().copied()).collect()
    };
    raw.into_iter()
        .map(|(a, b)| Ok((level(a)?, level(b)?)))
        .collect()
}
