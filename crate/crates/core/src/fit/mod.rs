//! Quasi-maximum-likelihood fitting of GJR-GARCH(1,1) and the per-day /
//! averaged-parameter experiment protocols built on it.

mod likelihood;
pub mod nelder_mead;

pub use likelihood::{gjr_log_likelihood, MIN_LIKELIHOOD_LEN};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::garch::{
    derive_seed, simulate, GarchError, GarchParams, ModelKind, SimulationResult, DEFAULT_BURN_IN,
};
use crate::series::TimeSeries;
use likelihood::{is_constant, log_likelihood_unchecked, population_variance};
use nelder_mead::{minimize, NelderMeadOptions};

/// Shortest series [`fit_gjr`] accepts.
pub const MIN_FIT_LEN: usize = 50;

/// Upper bound on `alpha1 + beta1 + gamma1/2` during fitting.
pub const MAX_PERSISTENCE: f64 = 1.0 - 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("series too short to fit: {len} observations, need at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("zero-variance returns")]
    ZeroVariance,
    #[error("{0} parameters cannot be evaluated with the GJR likelihood")]
    WrongModel(ModelKind),
    #[error("conditional variance became non-positive")]
    VarianceBreakdown,
    #[error("empty input")]
    EmptyInput,
    #[error("duplicate day identifier '{0}'")]
    DuplicateDay(String),
    #[error("no converged fits to average")]
    NoConvergedFits,
    #[error(transparent)]
    Params(#[from] GarchError),
}

/// Outcome of one fit. `converged == false` carries the reason in `message`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: GarchParams,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    pub n_obs: usize,
    pub message: Option<String>,
}

/// The optimizer works on an unconstrained vector
/// `[(mu - mean)/sd, ln(omega/var), logit(P/P_max), w_a, w_b]` where
/// `P = alpha1 + beta1 + gamma1/2` and `(beta1, alpha1/2, (alpha1+gamma1)/2)`
/// is `P * softmax(0, w_a, w_b)`. Every point maps to an admissible set.
struct Transform {
    mean: f64,
    sd: f64,
    variance: f64,
}

impl Transform {
    fn new(r: &[f64]) -> Self {
        let variance = population_variance(r);
        Self {
            mean: r.iter().sum::<f64>() / r.len() as f64,
            sd: variance.sqrt(),
            variance,
        }
    }

    /// `(mu, omega, alpha1, beta1, gamma1)`
    fn decode(&self, x: &[f64]) -> (f64, f64, f64, f64, f64) {
        let mu = self.mean + self.sd * x[0];
        let omega = self.variance * x[1].exp();
        let persistence = MAX_PERSISTENCE / (1.0 + (-x[2]).exp());
        let top = x[3].max(x[4]).max(0.0);
        let (eb, ea, en) = ((-top).exp(), (x[3] - top).exp(), (x[4] - top).exp());
        let total = eb + ea + en;
        let beta1 = persistence * eb / total;
        let alpha1 = 2.0 * persistence * ea / total;
        let downside = 2.0 * persistence * en / total;
        (mu, omega, alpha1, beta1, downside - alpha1)
    }

    /// Inverse of [`Transform::decode`]; needs strictly positive `alpha1`,
    /// `beta1` and `alpha1 + gamma1`.
    fn encode(&self, mu: f64, omega: f64, alpha1: f64, beta1: f64, gamma1: f64) -> Vec<f64> {
        let p = alpha1 + beta1 + 0.5 * gamma1;
        let ratio = p / MAX_PERSISTENCE;
        vec![
            (mu - self.mean) / self.sd,
            (omega / self.variance).ln(),
            (ratio / (1.0 - ratio)).ln(),
            (0.5 * alpha1 / beta1).ln(),
            (0.5 * (alpha1 + gamma1) / beta1).ln(),
        ]
    }
}

/// `(alpha1, beta1, gamma1)` of the multi-start points. The first is the
/// canonical start; the rest perturb it.
const STARTS: [(f64, f64, f64); 5] = [
    (0.05, 0.90, 0.0),
    (0.10, 0.80, 0.05),
    (0.03, 0.95, 0.01),
    (0.08, 0.85, -0.04),
    (0.15, 0.60, 0.10),
];

const START_STEPS: [f64; 5] = [0.1, 0.5, 0.5, 0.5, 0.5];

const SCOUT: NelderMeadOptions = NelderMeadOptions {
    max_iterations: 400,
    f_tol: 1e-10,
    x_tol: 1e-6,
};

const POLISH: NelderMeadOptions = NelderMeadOptions {
    max_iterations: 3000,
    f_tol: 1e-12,
    x_tol: 1e-6,
};

const POLISH_ROUNDS: usize = 3;

/// Multi-start points as parameter sets, with `mu` at the sample mean and
/// `omega` matching the sample variance.
pub fn start_points(returns: &TimeSeries) -> Vec<GarchParams> {
    let r = returns.values();
    let t = Transform::new(r);
    STARTS
        .iter()
        .map(|&(a, b, g)| {
            let p = a + b + 0.5 * g;
            GarchParams::gjr(t.mean, t.variance * (1.0 - p), a, b, g)
        })
        .collect()
}

/// Gaussian QMLE of a constant-mean GJR-GARCH(1,1).
///
/// Five Nelder-Mead runs from [`start_points`], then the best point is
/// polished with restarted simplex runs. `converged` reflects the final
/// polish. The returned likelihood is never below that of any start point.
pub fn fit_gjr(returns: &TimeSeries) -> Result<FitResult, FitError> {
    let r = returns.values();
    if r.len() < MIN_FIT_LEN {
        return Err(FitError::TooShort {
            len: r.len(),
            min: MIN_FIT_LEN,
        });
    }
    if is_constant(r) {
        return Err(FitError::ZeroVariance);
    }
    let transform = Transform::new(r);
    let initial_variance = transform.variance;
    let n = r.len() as f64;
    let objective = |x: &[f64]| {
        let (mu, omega, a, b, g) = transform.decode(x);
        match log_likelihood_unchecked(r, initial_variance, mu, omega, a, b, g) {
            Some(ll) => -ll / n,
            None => f64::INFINITY,
        }
    };

    let mut iterations = 0;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for p in start_points(returns) {
        let x0 = transform.encode(p.mu, p.omega, p.alpha1, p.beta1, p.gamma1);
        let run = minimize(objective, &x0, &START_STEPS, SCOUT);
        iterations += run.iterations;
        if best.as_ref().is_none_or(|(_, f)| run.f < *f) {
            best = Some((run.x, run.f));
        }
    }
    let (mut x, mut f) = best.expect("at least one start point");

    let mut converged = false;
    let mut steps = START_STEPS;
    for _ in 0..POLISH_ROUNDS {
        let run = minimize(objective, &x, &steps, POLISH);
        iterations += run.iterations;
        let improved = f - run.f;
        if run.f <= f {
            x = run.x;
            f = run.f;
        }
        converged = run.converged;
        if converged && improved <= POLISH.f_tol * (1.0 + f.abs()) {
            break;
        }
        steps.iter_mut().for_each(|s| *s *= 0.5);
    }

    let (mu, omega, alpha1, beta1, gamma1) = transform.decode(&x);
    let params = GarchParams::gjr(mu, omega, alpha1, beta1, gamma1);
    let log_likelihood = -f * n;
    let mut message = None;
    if !f.is_finite() {
        converged = false;
        message = Some("no start point gave a finite likelihood".to_string());
    } else if let Err(e) = params.validate() {
        converged = false;
        message = Some(format!("inadmissible optimum: {e}"));
    } else if !converged {
        message = Some("simplex search hit its iteration limit".to_string());
    }
    Ok(FitResult {
        params,
        log_likelihood,
        converged,
        iterations,
        n_obs: r.len(),
        message,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayFit {
    pub day: String,
    pub result: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedDay {
    pub day: String,
    pub reason: String,
}

/// Per-day fits. Every input day lands in exactly one of the two lists.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FitBatch {
    pub fits: Vec<DayFit>,
    pub excluded: Vec<ExcludedDay>,
}

fn day_id(series: &TimeSeries, index: usize) -> String {
    if series.label().is_empty() {
        format!("day{index:04}")
    } else {
        series.label().to_string()
    }
}

/// Fits every day independently. Days are keyed by their series label
/// (or `dayNNNN` when unlabeled); non-converged and unfittable days go to
/// `excluded`.
pub fn fit_per_day(days: &[TimeSeries]) -> Result<FitBatch, FitError> {
    if days.is_empty() {
        return Err(FitError::EmptyInput);
    }
    let ids: Vec<String> = days.iter().enumerate().map(|(i, d)| day_id(d, i)).collect();
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
        return Err(FitError::DuplicateDay(dup.clone()));
    }
    let outcomes: Vec<Result<FitResult, FitError>> = days.par_iter().map(fit_gjr).collect();
    let mut batch = FitBatch::default();
    for (day, outcome) in ids.into_iter().zip(outcomes) {
        match outcome {
            Ok(result) if result.converged => batch.fits.push(DayFit { day, result }),
            Ok(result) => batch.excluded.push(ExcludedDay {
                day,
                reason: result
                    .message
                    .unwrap_or_else(|| "optimizer did not converge".to_string()),
            }),
            Err(e) => batch.excluded.push(ExcludedDay {
                day,
                reason: e.to_string(),
            }),
        }
    }
    Ok(batch)
}

/// Plain arithmetic mean of each parameter over the converged fits.
pub fn average_params(batch: &FitBatch) -> Result<GarchParams, FitError> {
    average_params_where(batch, |_| true)
}

/// Like [`average_params`] but only over fits accepted by `keep`.
pub fn average_params_where(
    batch: &FitBatch,
    keep: impl Fn(&FitResult) -> bool,
) -> Result<GarchParams, FitError> {
    let chosen: Vec<&GarchParams> = batch
        .fits
        .iter()
        .filter(|f| f.result.converged && keep(&f.result))
        .map(|f| &f.result.params)
        .collect();
    if chosen.is_empty() {
        return Err(FitError::NoConvergedFits);
    }
    let n = chosen.len() as f64;
    let mean = |get: fn(&GarchParams) -> f64| chosen.iter().map(|p| get(p)).sum::<f64>() / n;
    Ok(GarchParams::gjr(
        mean(|p| p.mu),
        mean(|p| p.omega),
        mean(|p| p.alpha1),
        mean(|p| p.beta1),
        mean(|p| p.gamma1),
    ))
}

/// `n_series` independent simulations of one parameter set, seeded with
/// `derive_seed(seed, i)` and the default burn-in.
pub fn resimulate_experiment(
    params: &GarchParams,
    n_series: usize,
    length: usize,
    seed: u64,
) -> Result<Vec<SimulationResult>, GarchError> {
    params.validate()?;
    (0..n_series as u64)
        .into_par_iter()
        .map(|i| simulate(params, length, derive_seed(seed, i), DEFAULT_BURN_IN))
        .collect()
}

/// One simulation per converged day fit, in batch order.
pub fn resimulate_per_day(
    batch: &FitBatch,
    length: usize,
    seed: u64,
) -> Result<Vec<SimulationResult>, GarchError> {
    batch
        .fits
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            simulate(
                &f.result.params,
                length,
                derive_seed(seed, i as u64),
                DEFAULT_BURN_IN,
            )
        })
        .collect()
}
