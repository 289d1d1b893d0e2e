//! GARCH(1,1), EGARCH(1,1) and GJR-GARCH(1,1) simulation with Gaussian
//! innovations and a constant mean.
//!
//! All three share `r_t = mu + eps_t`, `eps_t = sigma_t * z_t` with
//! `z_t ~ N(0, 1)` i.i.d. The variance recursions are
//!
//! ```text
//! GARCH   sigma2_t = omega + alpha1 eps2_{t-1} + beta1 sigma2_{t-1}
//! GJR     sigma2_t = omega + (alpha1 + gamma1 1[eps_{t-1} < 0]) eps2_{t-1} + beta1 sigma2_{t-1}
//! EGARCH  ln sigma2_t = omega + alpha1 (|z_{t-1}| - E|z|) + gamma1 z_{t-1} + beta1 ln sigma2_{t-1}
//! ```
//!
//! with `E|z| = sqrt(2/pi)`. In the EGARCH form a negative `gamma1` raises the
//! variance after negative shocks; in the GJR form a positive `gamma1` does.

use std::f64::consts::FRAC_2_PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{SeriesError, TimeSeries};

/// Steps discarded before recording, unless overridden.
pub const DEFAULT_BURN_IN: usize = 1000;

/// Identifies the innovation generator recorded with every simulation.
pub const GENERATOR: &str = "ChaCha8Rng::seed_from_u64 + StandardNormal (rand 0.9)";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GarchError {
    #[error("parameter {name} is not finite")]
    NonFinite { name: &'static str },
    #[error("omega must be positive, got {0}")]
    NonPositiveOmega(f64),
    #[error("alpha1 must be non-negative, got {0}")]
    NegativeAlpha(f64),
    #[error("beta1 must be non-negative, got {0}")]
    NegativeBeta(f64),
    #[error("alpha1 + gamma1 must be non-negative for a GJR model, got {0}")]
    NegativeDownsideLoading(f64),
    #[error("not covariance stationary: persistence {0} must be below 1")]
    NotStationary(f64),
    #[error("EGARCH needs |beta1| < 1, got {0}")]
    EgarchBeta(f64),
    #[error("simulation length must be at least 2, got {0}")]
    TooShort(usize),
    #[error("initial variance must be positive and finite, got {0}")]
    BadInitialVariance(f64),
    #[error("variance became non-positive or non-finite ({value}) at step {step}")]
    VarianceBreakdown { step: usize, value: f64 },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Garch,
    Egarch,
    Gjr,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Garch => "garch",
            ModelKind::Egarch => "egarch",
            ModelKind::Gjr => "gjr",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "garch" => Ok(ModelKind::Garch),
            "egarch" => Ok(ModelKind::Egarch),
            "gjr" | "gjr-garch" | "gjrgarch" => Ok(ModelKind::Gjr),
            other => Err(format!(
                "unknown model '{other}' (expected garch, egarch or gjr)"
            )),
        }
    }
}

/// Model kind plus `(mu, omega, alpha1, beta1, gamma1)`. `gamma1` is ignored
/// for plain GARCH.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub kind: ModelKind,
    pub mu: f64,
    pub omega: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub gamma1: f64,
}

impl GarchParams {
    pub fn garch(mu: f64, omega: f64, alpha1: f64, beta1: f64) -> Self {
        Self {
            kind: ModelKind::Garch,
            mu,
            omega,
            alpha1,
            beta1,
            gamma1: 0.0,
        }
    }

    pub fn gjr(mu: f64, omega: f64, alpha1: f64, beta1: f64, gamma1: f64) -> Self {
        Self {
            kind: ModelKind::Gjr,
            mu,
            omega,
            alpha1,
            beta1,
            gamma1,
        }
    }

    pub fn egarch(mu: f64, omega: f64, alpha1: f64, beta1: f64, gamma1: f64) -> Self {
        Self {
            kind: ModelKind::Egarch,
            mu,
            omega,
            alpha1,
            beta1,
            gamma1,
        }
    }

    /// The shared demonstration set: omega = 1e-5, alpha1 = 0.05,
    /// beta1 = 0.9, mu = 0.001, with gamma1 = -0.06 (EGARCH) or +0.06 (GJR).
    pub fn demonstration(kind: ModelKind) -> Self {
        let (mu, omega, alpha1, beta1) = (0.001, 0.00001, 0.05, 0.9);
        match kind {
            ModelKind::Garch => Self::garch(mu, omega, alpha1, beta1),
            ModelKind::Egarch => Self::egarch(mu, omega, alpha1, beta1, -0.06),
            ModelKind::Gjr => Self::gjr(mu, omega, alpha1, beta1, 0.06),
        }
    }

    /// `alpha1 + beta1` (GARCH), `alpha1 + beta1 + gamma1/2` (GJR) or
    /// `beta1` (EGARCH).
    pub fn persistence(&self) -> f64 {
        match self.kind {
            ModelKind::Garch => self.alpha1 + self.beta1,
            ModelKind::Gjr => self.alpha1 + self.beta1 + 0.5 * self.gamma1,
            ModelKind::Egarch => self.beta1,
        }
    }

    pub fn validate(&self) -> Result<(), GarchError> {
        for (name, v) in [
            ("mu", self.mu),
            ("omega", self.omega),
            ("alpha1", self.alpha1),
            ("beta1", self.beta1),
            ("gamma1", self.gamma1),
        ] {
            if !v.is_finite() {
                return Err(GarchError::NonFinite { name });
            }
        }
        match self.kind {
            ModelKind::Egarch => {
                if self.beta1.abs() >= 1.0 {
                    return Err(GarchError::EgarchBeta(self.beta1));
                }
            }
            ModelKind::Garch | ModelKind::Gjr => {
                if self.omega <= 0.0 {
                    return Err(GarchError::NonPositiveOmega(self.omega));
                }
                if self.alpha1 < 0.0 {
                    return Err(GarchError::NegativeAlpha(self.alpha1));
                }
                if self.beta1 < 0.0 {
                    return Err(GarchError::NegativeBeta(self.beta1));
                }
                if self.kind == ModelKind::Gjr && self.alpha1 + self.gamma1 < 0.0 {
                    return Err(GarchError::NegativeDownsideLoading(
                        self.alpha1 + self.gamma1,
                    ));
                }
                let p = self.persistence();
                if p >= 1.0 {
                    return Err(GarchError::NotStationary(p));
                }
            }
        }
        Ok(())
    }
}

/// Stationary variance used to start the recursion. For EGARCH this is
/// `exp(omega / (1 - beta1))`, the fixed point of the log-variance recursion.
pub fn unconditional_variance(params: &GarchParams) -> Result<f64, GarchError> {
    params.validate()?;
    Ok(match params.kind {
        ModelKind::Garch | ModelKind::Gjr => params.omega / (1.0 - params.persistence()),
        ModelKind::Egarch => (params.omega / (1.0 - params.beta1)).exp(),
    })
}

/// Simulated returns with their conditional variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub returns: TimeSeries,
    pub variances: Vec<f64>,
    pub params: GarchParams,
    pub innovations_seed: u64,
    pub burn_in: usize,
    pub generator: String,
}

/// One step of the variance recursion, from the state at `t-1` to `t`.
struct Recursion {
    params: GarchParams,
    mean_abs_z: f64,
}

impl Recursion {
    fn new(params: GarchParams) -> Self {
        Self {
            params,
            mean_abs_z: FRAC_2_PI.sqrt(),
        }
    }

    fn next_variance(&self, variance: f64, z: f64) -> f64 {
        let p = &self.params;
        match p.kind {
            ModelKind::Garch => {
                let eps2 = variance * z * z;
                p.omega + p.alpha1 * eps2 + p.beta1 * variance
            }
            ModelKind::Gjr => {
                let eps2 = variance * z * z;
                let loading = if z < 0.0 {
                    p.alpha1 + p.gamma1
                } else {
                    p.alpha1
                };
                p.omega + loading * eps2 + p.beta1 * variance
            }
            ModelKind::Egarch => {
                let log_var = p.omega
                    + p.alpha1 * (z.abs() - self.mean_abs_z)
                    + p.gamma1 * z
                    + p.beta1 * variance.ln();
                log_var.exp()
            }
        }
    }
}

/// Runs the recursion on given innovations starting from `initial_variance`
/// and returns `(returns, variances)` without any burn-in.
pub fn simulate_with_innovations(
    params: &GarchParams,
    innovations: &[f64],
    initial_variance: f64,
) -> Result<(Vec<f64>, Vec<f64>), GarchError> {
    params.validate()?;
    if !(initial_variance.is_finite() && initial_variance > 0.0) {
        return Err(GarchError::BadInitialVariance(initial_variance));
    }
    let rec = Recursion::new(*params);
    let mut returns = Vec::with_capacity(innovations.len());
    let mut variances = Vec::with_capacity(innovations.len());
    let mut variance = initial_variance;
    for (step, &z) in innovations.iter().enumerate() {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(GarchError::VarianceBreakdown {
                step,
                value: variance,
            });
        }
        returns.push(params.mu + variance.sqrt() * z);
        variances.push(variance);
        variance = rec.next_variance(variance, z);
    }
    Ok((returns, variances))
}

/// Simulates `length` recorded steps after discarding `burn_in` steps.
/// The recursion starts from [`unconditional_variance`].
pub fn simulate(
    params: &GarchParams,
    length: usize,
    seed: u64,
    burn_in: usize,
) -> Result<SimulationResult, GarchError> {
    if length < 2 {
        return Err(GarchError::TooShort(length));
    }
    let start = unconditional_variance(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z: Vec<f64> = (0..burn_in + length)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let (mut returns, mut variances) = simulate_with_innovations(params, &z, start)?;
    returns.drain(..burn_in);
    variances.drain(..burn_in);
    Ok(SimulationResult {
        returns: TimeSeries::new(returns, 1.0, format!("{}-seed{seed}", params.kind))?,
        variances,
        params: *params,
        innovations_seed: seed,
        burn_in,
        generator: GENERATOR.to_string(),
    })
}

/// Per-item seed for batch runs (splitmix64 finalizer over base and index).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
