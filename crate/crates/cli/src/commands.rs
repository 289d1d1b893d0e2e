use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use qcorr::fit::{average_params_where, resimulate_experiment, resimulate_per_day, FitBatch};
use qcorr::garch::{derive_seed, GarchParams, SimulationResult};
use qcorr::ingest::{ingest, DayOutcome, SessionConfig, INDEX_INSTRUMENT};
use qcorr::io::{self, AsymmetryRow};
use qcorr::qcf::{asymmetry_up_to, average_grids};
use qcorr::{
    average_curves, build_index, confidence_band, fit_per_day, pp_grid, qcf_fast, simulate,
    ProbabilityLevel, QcfCurve, TradingDay,
};
use rayon::prelude::*;

use crate::args::*;
use crate::error::CliError;
use crate::inputs::{level, list_files, load_series, read_text, resolve_pairs, stem, SourceKind};
use crate::output::Artifacts;

/// What a command produced: files for `dir`, and text for stdout.
#[derive(Debug, Default)]
pub struct Output {
    pub artifacts: Artifacts,
    pub dir: Option<PathBuf>,
    pub stdout: String,
}

impl Output {
    fn to_dir(dir: &std::path::Path) -> Self {
        Self {
            dir: Some(dir.to_path_buf()),
            ..Self::default()
        }
    }
}

fn ext(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn seed(args: &SeedArgs) -> Result<u64, CliError> {
    match std::env::var("QCORR_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("QCORR_SEED='{v}' is not an unsigned integer"))),
        Err(_) => Ok(args.seed),
    }
}

pub fn run(command: Command) -> Result<Output, CliError> {
    match command {
        Command::Ingest(a) => run_ingest(&a),
        Command::Index(a) => run_index(&a),
        Command::Qcf(a) => run_qcf(&a),
        Command::Ppgrid(a) => run_ppgrid(&a),
        Command::Asym(a) => run_asym(&a),
        Command::Simulate(a) => run_simulate(&a),
        Command::Fit(a) => run_fit(&a),
        Command::Resim(a) => run_resim(&a),
    }
}

fn run_ingest(a: &IngestArgs) -> Result<Output, CliError> {
    let files = list_files(&a.input)?;
    if files.len() != 1 || !a.input.is_file() {
        return Err(CliError::config("ingest expects a single tick CSV file"));
    }
    let session = SessionConfig {
        open: a.session_open,
        close: a.session_close,
        trim: a.trim,
        min_traded_seconds: a.min_traded,
    };
    let file = File::open(&a.input).map_err(|e| CliError::io(&a.input, e))?;
    let outcomes = ingest(BufReader::new(file), &session)?;
    let mut out = Output::to_dir(&a.out);
    let mut rejections = Vec::new();
    let mut accepted = 0;
    for outcome in outcomes {
        match outcome {
            DayOutcome::Accepted(day) => {
                out.artifacts.add(
                    format!("days/{}.csv", io::day_file_stem(&day)),
                    io::day_to_csv(&day),
                );
                accepted += 1;
            }
            DayOutcome::Rejected(r) => rejections.push(r),
        }
    }
    out.artifacts
        .add("rejections.csv", io::rejections_to_csv(&rejections));
    out.stdout = format!("accepted {accepted} days, rejected {}\n", rejections.len());
    Ok(out)
}

fn run_index(a: &IndexArgs) -> Result<Output, CliError> {
    let mut by_date: BTreeMap<_, Vec<TradingDay>> = BTreeMap::new();
    for path in list_files(&a.input)? {
        let file = File::open(&path).map_err(|e| CliError::io(&path, e))?;
        let day = io::read_day_csv(BufReader::new(file), &stem(&path))
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        if day.instrument != INDEX_INSTRUMENT {
            by_date.entry(day.date).or_default().push(day);
        }
    }
    let mut out = Output::to_dir(&a.out);
    for days in by_date.values() {
        let index = build_index(days)?;
        out.artifacts.add(
            format!("{}.csv", io::day_file_stem(&index)),
            io::day_to_csv(&index),
        );
    }
    Ok(out)
}

fn write_curve(
    out: &mut Output,
    name: String,
    curve: &QcfCurve,
    format: Format,
) -> Result<(), CliError> {
    let text = match format {
        Format::Csv => io::curve_to_csv(curve),
        Format::Json => io::curve_to_json(curve)?,
    };
    out.artifacts.add(format!("{name}.{}", ext(format)), text);
    Ok(())
}

fn run_qcf(a: &QcfArgs) -> Result<Output, CliError> {
    let pairs = resolve_pairs(&a.alpha, &a.beta)?;
    if a.max_lag == 0 {
        return Err(CliError::config("--max-lag must be positive"));
    }
    let loaded = load_series(&a.input, &a.returns, 1)?;
    let median = level(0.5)?;
    // The (0.5, 0.5) curve sets the band and is computed even if not requested.
    let mut wanted = pairs.clone();
    wanted.push((median, median));
    let per_series: Vec<Vec<QcfCurve>> = loaded
        .series
        .par_iter()
        .map(|s| {
            wanted
                .iter()
                .map(|&(p, q)| qcf_fast(s, p, q, a.max_lag))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let mut out = Output::to_dir(&a.out);
    let name = |p: ProbabilityLevel, q: ProbabilityLevel| format!("qcf_{p}_{q}");
    if a.no_average {
        for (series, curves) in loaded.series.iter().zip(&per_series) {
            let band = confidence_band(curves.last().expect("reference curve"))?;
            for (curve, &(p, q)) in curves.iter().zip(&pairs) {
                let label = series.label();
                write_curve(
                    &mut out,
                    format!("{label}_{}", name(p, q)),
                    &curve.clone().with_ci(band),
                    a.format,
                )?;
            }
        }
    } else {
        let averaged: Vec<QcfCurve> = (0..wanted.len())
            .map(|k| {
                let column: Vec<QcfCurve> = per_series.iter().map(|c| c[k].clone()).collect();
                average_curves(&column)
            })
            .collect::<Result<_, _>>()?;
        let band = confidence_band(averaged.last().expect("reference curve"))?;
        for (curve, &(p, q)) in averaged.iter().zip(&pairs) {
            write_curve(&mut out, name(p, q), &curve.clone().with_ci(band), a.format)?;
        }
    }
    Ok(out)
}

const SIMULATION_LAGS: [i64; 2] = [2, 10];
const EMPIRICAL_LAG_SECONDS: [i64; 4] = [120, 600, 1200, 3600];

fn grid_lags(a: &PpgridArgs, kind: SourceKind) -> Result<Vec<i64>, CliError> {
    if !a.lag.is_empty() {
        return Ok(a.lag.clone());
    }
    match kind {
        SourceKind::Returns => Ok(SIMULATION_LAGS.to_vec()),
        SourceKind::Prices { stride } => EMPIRICAL_LAG_SECONDS
            .iter()
            .map(|&secs| {
                let stride = stride as i64;
                if secs % stride == 0 {
                    Ok(secs / stride)
                } else {
                    Err(CliError::config(format!(
                        "default lag of {secs} s is not a multiple of the {stride} s stride; pass --lag"
                    )))
                }
            })
            .collect(),
    }
}

fn run_ppgrid(a: &PpgridArgs) -> Result<Output, CliError> {
    let levels: Vec<ProbabilityLevel> = if a.levels.is_empty() {
        ProbabilityLevel::default_grid()
    } else {
        a.levels
            .iter()
            .map(|&p| level(p))
            .collect::<Result<_, _>>()?
    };
    let loaded = load_series(&a.input, &a.returns, 1)?;
    let lags = grid_lags(a, loaded.kind)?;
    let write = |out: &mut Output, name: String, grid: &qcorr::PPGrid| -> Result<(), CliError> {
        let text = match a.format {
            Format::Csv => io::grid_to_csv(grid),
            Format::Json => io::grid_to_json(grid)?,
        };
        out.artifacts.add(format!("{name}.{}", ext(a.format)), text);
        Ok(())
    };
    let mut out = Output::to_dir(&a.out);
    for &lag in &lags {
        let grids: Vec<qcorr::PPGrid> = loaded
            .series
            .par_iter()
            .map(|s| pp_grid(s, &levels, lag))
            .collect::<Result<_, _>>()?;
        if a.no_average {
            for (s, g) in loaded.series.iter().zip(&grids) {
                write(&mut out, format!("{}_ppgrid_lag{lag}", s.label()), g)?;
            }
        } else {
            write(
                &mut out,
                format!("ppgrid_lag{lag}"),
                &average_grids(&grids)?,
            )?;
        }
    }
    Ok(out)
}

fn run_asym(a: &AsymArgs) -> Result<Output, CliError> {
    let (alpha, beta) = (level(a.alpha)?, level(a.beta)?);
    let mut rows = Vec::new();
    for path in &a.input {
        if !path.is_file() {
            return Err(CliError::config(format!(
                "input {} is not a file",
                path.display()
            )));
        }
        let text = read_text(path)?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let curve = if is_json {
            io::read_curve_json(&text)
        } else {
            io::read_curve_csv(text.as_bytes(), alpha, beta)
        }
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let report = asymmetry_up_to(&curve, a.max_lag.unwrap_or(curve.max_lag()))?;
        rows.push(AsymmetryRow {
            dataset: a.dataset.clone().unwrap_or_else(|| stem(path)),
            year: a.year.clone(),
            report,
        });
    }
    let table = io::asymmetry_table(&rows);
    match &a.out {
        Some(dir) => {
            let mut out = Output::to_dir(dir);
            out.artifacts.add("asymmetry.txt", table);
            out.artifacts.add("asymmetry.csv", io::asymmetry_csv(&rows));
            Ok(out)
        }
        None => Ok(Output {
            stdout: table,
            ..Output::default()
        }),
    }
}

fn model_params(m: &ModelArgs) -> Result<GarchParams, CliError> {
    let base = GarchParams::demonstration(m.model);
    let params = GarchParams {
        kind: m.model,
        mu: m.mu.unwrap_or(base.mu),
        omega: m.omega.unwrap_or(base.omega),
        alpha1: m.alpha1.unwrap_or(base.alpha1),
        beta1: m.beta1.unwrap_or(base.beta1),
        gamma1: m.gamma1.unwrap_or(base.gamma1),
    };
    params
        .validate()
        .map_err(|e| CliError::config(format!("model parameters: {e}")))?;
    Ok(params)
}

fn write_simulations(
    out: &mut Output,
    sims: &[SimulationResult],
    format: Format,
) -> Result<(), CliError> {
    for (i, sim) in sims.iter().enumerate() {
        match format {
            Format::Csv => {
                out.artifacts
                    .add(format!("sim_{i:04}.csv"), io::simulation_to_csv(sim));
                out.artifacts.add(
                    format!("sim_{i:04}.meta.json"),
                    io::simulation_sidecar(sim)?,
                );
            }
            Format::Json => {
                let text = serde_json::to_string_pretty(sim)
                    .map_err(|e| CliError::config(e.to_string()))?;
                out.artifacts.add(format!("sim_{i:04}.json"), text + "\n");
            }
        }
    }
    Ok(())
}

fn check_length(length: usize) -> Result<(), CliError> {
    if length < 2 {
        return Err(CliError::config("--length must be at least 2"));
    }
    Ok(())
}

fn run_simulate(a: &SimulateArgs) -> Result<Output, CliError> {
    let params = model_params(&a.model)?;
    check_length(a.length)?;
    if a.n_series == 0 {
        return Err(CliError::config("--n-series must be positive"));
    }
    let base = seed(&a.seed)?;
    let sims: Vec<SimulationResult> = (0..a.n_series as u64)
        .into_par_iter()
        .map(|i| simulate(&params, a.length, derive_seed(base, i), a.burn_in))
        .collect::<Result<_, _>>()?;
    let mut out = Output::to_dir(&a.out);
    write_simulations(&mut out, &sims, a.format)?;
    Ok(out)
}

fn run_fit(a: &FitArgs) -> Result<Output, CliError> {
    let loaded = load_series(&a.input, &a.returns, a.returns.horizon)?;
    let batch = fit_per_day(&loaded.series)?;
    let average = average_params_where(&batch, |r| {
        a.max_persistence
            .is_none_or(|m| r.params.persistence() <= m)
    })?;
    let mut out = Output::to_dir(&a.out);
    let fits = match a.format {
        Format::Csv => io::fit_batch_to_csv(&batch),
        Format::Json => io::fit_batch_to_json(&batch)?,
    };
    out.artifacts.add(format!("fits.{}", ext(a.format)), fits);
    let mut excluded = String::from("day,reason\n");
    for e in &batch.excluded {
        excluded.push_str(&format!("{},\"{}\"\n", e.day, e.reason.replace('"', "'")));
    }
    out.artifacts.add("excluded.csv", excluded);
    out.artifacts
        .add("average.json", io::params_to_json(&average)?);
    out.stdout = format!(
        "fitted {} series, excluded {}\n",
        batch.fits.len(),
        batch.excluded.len()
    );
    Ok(out)
}

enum ResimSource {
    Averaged(GarchParams),
    PerDay(FitBatch),
}

fn resim_source(path: &std::path::Path) -> Result<ResimSource, CliError> {
    if !path.is_file() {
        return Err(CliError::config(format!(
            "input {} is not a file",
            path.display()
        )));
    }
    let text = read_text(path)?;
    let bad = |e: String| CliError::config(format!("{}: {e}", path.display()));
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        if let Ok(p) = io::read_params_json(&text) {
            return Ok(ResimSource::Averaged(p));
        }
        let batch: FitBatch = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        return Ok(ResimSource::PerDay(batch));
    }
    io::read_fit_batch_csv(text.as_bytes())
        .map(ResimSource::PerDay)
        .map_err(|e| bad(e.to_string()))
}

fn run_resim(a: &ResimArgs) -> Result<Output, CliError> {
    check_length(a.length)?;
    let base = seed(&a.seed)?;
    let sims = match resim_source(&a.input)? {
        ResimSource::Averaged(params) => {
            params
                .validate()
                .map_err(|e| CliError::config(format!("parameters: {e}")))?;
            resimulate_experiment(&params, a.n_series, a.length, base)?
        }
        ResimSource::PerDay(batch) => resimulate_per_day(&batch, a.length, base)?,
    };
    let mut out = Output::to_dir(&a.out);
    write_simulations(&mut out, &sims, a.format)?;
    Ok(out)
}
