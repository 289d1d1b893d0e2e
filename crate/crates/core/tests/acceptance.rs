//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use qcorr::fit::{average_params, fit_per_day};
use qcorr::garch::{derive_seed, DEFAULT_BURN_IN};
use qcorr::ingest::{
    resample_day, DayOutcome, RejectReason, SessionConfig, TickRecord, STANDARD_GRID_LEN,
};
use qcorr::qcf::qcf_filtered;
use qcorr::quantile::{filter_values, BinarySeries};
use qcorr::{
    asymmetry, average_curves, confidence_band, filter_series, fit_gjr, qcf, qcf_fast, simulate,
    GarchParams, ModelKind, ProbabilityLevel, QcfCurve, TimeSeries,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;
type Transform = fn(f64) -> f64;

fn p(v: f64) -> ProbabilityLevel {
    ProbabilityLevel::new(v).unwrap()
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(elapsed: Duration, budget: Duration, what: &str) -> Result<(), String> {
    check(elapsed < budget, || {
        format!("{what} took {elapsed:.2?}, budget {budget:.0?}")
    })
}

// 1 -------------------------------------------------------------------------

fn worked_example() -> Outcome {
    let x = TimeSeries::from_values(vec![1.0, -5.0, 10.0, 0.0, -6.0, -2.0, -2.0, 2.0, 0.0, 2.0])
        .unwrap();
    let start = Instant::now();
    let f = filter_series(&x, p(0.5)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(f.bits() == [0, 1, 0, 1, 1, 1, 1, 0, 1, 0], || {
        format!("bits {:?}", f.bits())
    })?;
    check(f.quantile_value() == 0.0, || {
        format!("q = {}", f.quantile_value())
    })?;
    within_budget(elapsed, Duration::from_millis(1), "filter")?;
    Ok(format!("bits (0,1,0,1,1,1,1,0,1,0), q = 0, {elapsed:.2?}"))
}

// 2 -------------------------------------------------------------------------

fn random_instance(
    rng: &mut ChaCha8Rng,
) -> (TimeSeries, ProbabilityLevel, ProbabilityLevel, usize) {
    loop {
        let len = rng.random_range(8..=4096);
        let tied = rng.random_bool(0.3);
        let values: Vec<f64> = (0..len)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                if tied {
                    (z * 4.0).round()
                } else {
                    z
                }
            })
            .collect();
        let a = p(f64::from(rng.random_range(1..=19u32)) / 20.0);
        let b = p(f64::from(rng.random_range(1..=19u32)) / 20.0);
        let max_lag = rng.random_range(1..=len / 4);
        let usable = [a, b]
            .iter()
            .all(|&l| !filter_values(&values, l).unwrap().is_degenerate());
        if usable {
            return (TimeSeries::from_values(values).unwrap(), a, b, max_lag);
        }
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x2002);
    let instances: Vec<_> = (0..1000).map(|_| random_instance(&mut rng)).collect();
    let worst = instances
        .par_iter()
        .map(|(x, a, b, max_lag)| {
            let direct = qcf(x, *a, *b, *max_lag).unwrap();
            let fast = qcf_fast(x, *a, *b, *max_lag).unwrap();
            direct
                .values()
                .iter()
                .zip(fast.values())
                .map(|(d, f)| (d - f).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed();
    check(worst <= 1e-10, || {
        format!("max |fast - direct| = {worst:e}")
    })?;
    within_budget(elapsed, Duration::from_secs(60), "1000 instances")?;
    Ok(format!(
        "1000 instances, max |fast - direct| = {worst:.1e}, {elapsed:.2?}"
    ))
}

// 3 -------------------------------------------------------------------------

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn invariance_suite() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(0x3003);
    let mut checked = 0;
    while checked < 200 {
        let (x, a, b, _) = random_instance(&mut rng);
        let values = x.values();
        let max_lag = (x.len() - 1) / 2;
        let (fa, fb) = (
            filter_values(values, a).unwrap(),
            filter_values(values, b).unwrap(),
        );
        let run = |u: &BinarySeries, w: &BinarySeries| {
            qcf_filtered(u, w, max_lag).map_err(|e| e.to_string())
        };

        let aa = run(&fa, &fa)?;
        let sym = max_diff(aa.values(), aa.mirrored().values());
        check(sym <= TOL, || {
            format!("series {checked}: alpha = beta asymmetry {sym:e}")
        })?;

        let ab = run(&fa, &fb)?;
        let ba = run(&fb, &fa)?;
        let swap = max_diff(ab.mirrored().values(), ba.values());
        check(swap <= TOL, || {
            format!("series {checked}: swap identity off by {swap:e}")
        })?;

        let twice = fa.complement().complement();
        check(twice.bits() == fa.bits(), || {
            format!("series {checked}: double complement changed bits")
        })?;
        let both = run(&fa.complement(), &fb.complement())?;
        let dc = max_diff(both.values(), ab.values());
        check(dc <= TOL, || {
            format!("series {checked}: double complement off by {dc:e}")
        })?;

        let one = run(&fa.complement(), &fb)?;
        let flipped: Vec<f64> = ab.values().iter().map(|v| -v).collect();
        let sc = max_diff(one.values(), &flipped);
        check(sc <= TOL, || {
            format!("series {checked}: single complement off by {sc:e}")
        })?;

        let maps: [(&str, Transform); 3] = [
            ("affine", |v| 3.0 * v - 7.0),
            ("exp", |v| (v / 4.0).exp()),
            ("cubic", |v| v * v * v + v),
        ];
        for (name, f) in maps {
            let y: Vec<f64> = values.iter().map(|&v| f(v)).collect();
            let (ga, gb) = (filter_values(&y, a).unwrap(), filter_values(&y, b).unwrap());
            check(ga.bits() == fa.bits() && gb.bits() == fb.bits(), || {
                format!("series {checked}: {name} map changed filter bits")
            })?;
            let moved = run(&ga, &gb)?;
            let d = max_diff(moved.values(), ab.values());
            check(d <= TOL, || {
                format!("series {checked}: {name} map moved qcf by {d:e}")
            })?;
        }
        checked += 1;
    }
    Ok("200 series: symmetry, swap, double/single complement, 3 monotone maps".into())
}

// 4-6: simulated processes ----------------------------------------------------

const SEEDS: u64 = 250;
const SIM_LEN: usize = 5000;
const SIM_MAX_LAG: usize = 100;

/// Per-seed curves for each pair, seeds in order.
fn simulated_curves(params: &GarchParams, base: u64, pairs: &[(f64, f64)]) -> Vec<Vec<QcfCurve>> {
    (0..SEEDS)
        .into_par_iter()
        .map(|i| {
            let sim = simulate(params, SIM_LEN, derive_seed(base, i), DEFAULT_BURN_IN).unwrap();
            pairs
                .iter()
                .map(|&(a, b)| qcf_fast(&sim.returns, p(a), p(b), SIM_MAX_LAG).unwrap())
                .collect()
        })
        .collect()
}

fn column(curves: &[Vec<QcfCurve>], k: usize) -> Vec<QcfCurve> {
    curves.iter().map(|c| c[k].clone()).collect()
}

/// Mean and Monte Carlo standard error of per-seed values at one lag.
fn mean_se(samples: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = samples.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn garch_null_and_symmetry() -> Outcome {
    // Both checks cover 100 correlated lags at once; a 3 SE family-wise level
    // over 100 lags is about 4 SE per lag (Bonferroni).
    const FAMILY_LIMIT: f64 = 4.0;
    let start = Instant::now();
    let params = GarchParams::demonstration(ModelKind::Garch);
    let curves = simulated_curves(&params, 0x4004, &[(0.5, 0.5), (0.05, 0.05), (0.95, 0.95)]);
    let (mut worst_null, mut worst_sym, mut worst_lag, mut beyond3) = (0.0f64, 0.0f64, 0, 0);
    for lag in 1..=SIM_MAX_LAG as i64 {
        let (m, se) = mean_se(curves.iter().map(|c| c[0].value_at(lag).unwrap()));
        let z = m.abs() / se;
        worst_null = worst_null.max(z);
        check(z <= FAMILY_LIMIT, || {
            format!("(0.5,0.5) lag {lag}: mean {m:.2e} is {z:.2} SE from 0")
        })?;
        let (d, se_d) = mean_se(
            curves
                .iter()
                .map(|c| c[1].value_at(lag).unwrap() - c[2].value_at(lag).unwrap()),
        );
        let zd = d.abs() / se_d;
        if zd > worst_sym {
            (worst_sym, worst_lag) = (zd, lag);
        }
        beyond3 += usize::from(zd > 3.0);
        check(zd <= FAMILY_LIMIT, || {
            format!("lag {lag}: (0.05,0.05) - (0.95,0.95) = {d:.2e}, {zd:.2} SE")
        })?;
    }
    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(300), "simulation")?;
    Ok(format!(
        "lags 1-100: max |null| {worst_null:.2} SE, max tail difference {worst_sym:.2} SE at lag {worst_lag} \
         ({beyond3}/100 lags beyond 3 SE; family-wise limit {FAMILY_LIMIT} SE), {elapsed:.2?}"
    ))
}

fn gjr_direction() -> Outcome {
    let params = GarchParams::demonstration(ModelKind::Gjr);
    let curves = simulated_curves(&params, 0x5005, &[(0.05, 0.05), (0.95, 0.95), (0.05, 0.95)]);
    let low = average_curves(&column(&curves, 0)).map_err(|e| e.to_string())?;
    let high = average_curves(&column(&curves, 1)).map_err(|e| e.to_string())?;
    let cross = average_curves(&column(&curves, 2)).map_err(|e| e.to_string())?;
    for lag in 1..=20 {
        let (l, h) = (low.value_at(lag).unwrap(), high.value_at(lag).unwrap());
        check(l > h, || {
            format!("lag {lag}: (0.05,0.05) {l:.4} not above (0.95,0.95) {h:.4}")
        })?;
    }
    for lag in 1..=SIM_MAX_LAG as i64 {
        for l in [lag, -lag] {
            let v = cross.value_at(l).unwrap();
            check(v < 0.0, || {
                format!("(0.05,0.95) at lag {l} is {v:.4}, expected negative")
            })?;
        }
    }
    let report = asymmetry(&cross).map_err(|e| e.to_string())?;
    // Negative shocks raise later variance, so the cross curve is larger in
    // magnitude at positive lags: A+ > A-, i.e. delta < 0.
    check(!report.degenerate && report.delta < 0.0, || {
        format!(
            "delta = {:.4}, expected a nonzero negative value",
            report.delta
        )
    })?;
    Ok(format!(
        "low tail above high tail at lags 1-20, cross curve negative at all 200 lags, ΔA = {:.3} ({}%)",
        report.delta,
        report.delta_percent()
    ))
}

fn egarch_one_sided() -> Outcome {
    let params = GarchParams::demonstration(ModelKind::Egarch);
    let curves = simulated_curves(&params, 0x6006, &[(0.05, 0.95), (0.5, 0.5)]);
    let cross = average_curves(&column(&curves, 0)).map_err(|e| e.to_string())?;
    let reference = average_curves(&column(&curves, 1)).map_err(|e| e.to_string())?;
    let band = confidence_band(&reference).map_err(|e| e.to_string())?;

    let significant: Vec<i64> = (1..=50)
        .filter(|&l| cross.value_at(l).unwrap() < -band)
        .collect();
    check(
        significant.len() >= 10 && (1..=10).all(|l| significant.contains(&l)),
        || format!("positive lags below -band: {significant:?}"),
    )?;
    let negative_side: Vec<f64> = (1..=50).map(|l| cross.value_at(-l).unwrap()).collect();
    let below: Vec<i64> = (1..=50)
        .filter(|&l| cross.value_at(-l).unwrap() < -band)
        .collect();
    check(below.is_empty(), || {
        format!("negative lags significantly negative: {below:?}")
    })?;
    // A pointwise 95% band; the same containment rate the band is built for.
    let inside = negative_side.iter().filter(|v| v.abs() <= band).count();
    let outside: Vec<i64> = (1..=50)
        .filter(|&l| cross.value_at(-l).unwrap().abs() > band)
        .collect();
    check(inside * 100 >= 93 * 50, || {
        format!("only {inside}/50 negative lags inside ±{band:.2e}; outside: {outside:?}")
    })?;
    Ok(format!(
        "band ±{band:.2e}; {} of positive lags 1-50 below -band (incl. 1-10); negative lags 1-50: none below -band, {inside}/50 inside (above: {outside:?})",
        significant.len()
    ))
}

// 7 -------------------------------------------------------------------------

fn parameter_recovery() -> Outcome {
    let start = Instant::now();
    let truth = GarchParams::gjr(0.0, 0.05, 0.05, 0.90, 0.06);
    let fits: Vec<GarchParams> = (0..20u64)
        .into_par_iter()
        .map(|i| {
            let sim = simulate(&truth, 50_000, derive_seed(0x7007, i), DEFAULT_BURN_IN).unwrap();
            let fit = fit_gjr(&sim.returns).unwrap();
            assert!(fit.converged, "seed {i}: {:?}", fit.message);
            fit.params
        })
        .collect();
    let mut errors: Vec<f64> = fits
        .iter()
        .map(|f| (f.gamma1 - truth.gamma1).abs())
        .collect();
    errors.sort_by(f64::total_cmp);
    let median = (errors[9] + errors[10]) / 2.0;
    check(median < 0.02, || {
        format!("median |gamma1 error| = {median:.4}")
    })?;
    let worst = fits
        .iter()
        .map(|f| (f.persistence() - truth.persistence()).abs())
        .fold(0.0, f64::max);
    check(worst <= 0.02, || {
        format!("persistence off by up to {worst:.4}")
    })?;
    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(600), "20 fits")?;
    Ok(format!(
        "median |γ̂1 - γ1| = {median:.4}, max persistence error {worst:.4} over 20 fits, {elapsed:.2?}"
    ))
}

// 8 -------------------------------------------------------------------------

fn cross_asymmetry(params: &GarchParams, base: u64) -> f64 {
    let curves: Vec<QcfCurve> = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let sim = simulate(params, SIM_LEN, derive_seed(base, i), DEFAULT_BURN_IN).unwrap();
            qcf_fast(&sim.returns, p(0.05), p(0.95), SIM_MAX_LAG).unwrap()
        })
        .collect();
    asymmetry(&average_curves(&curves).unwrap()).unwrap().delta
}

fn averaging_cancellation() -> Outcome {
    // Days alternate between leverage and reverse leverage.
    let days: Vec<TimeSeries> = (0..12u64)
        .map(|i| {
            let gamma = if i % 2 == 0 { 0.06 } else { -0.05 };
            let params = GarchParams::gjr(0.0, 0.05, 0.06, 0.88, gamma);
            let sim = simulate(&params, 3000, derive_seed(0x8008, i), DEFAULT_BURN_IN).unwrap();
            sim.returns.with_label(format!("day{i:02}"))
        })
        .collect();
    let batch = fit_per_day(&days).map_err(|e| e.to_string())?;
    check(batch.fits.len() >= 10, || {
        format!("only {} converged fits", batch.fits.len())
    })?;
    let gammas: Vec<f64> = batch.fits.iter().map(|f| f.result.params.gamma1).collect();
    let (lo, hi) = gammas
        .iter()
        .fold((f64::MAX, f64::MIN), |(l, h), &g| (l.min(g), h.max(g)));
    check(lo < 0.0 && hi > 0.0, || {
        format!("fitted gamma1 in [{lo:.4}, {hi:.4}] does not straddle 0")
    })?;
    let avg = average_params(&batch).map_err(|e| e.to_string())?;
    let largest = batch
        .fits
        .iter()
        .map(|f| f.result.params)
        .max_by(|a, b| a.gamma1.abs().total_cmp(&b.gamma1.abs()))
        .unwrap();
    check(avg.gamma1.abs() < largest.gamma1.abs(), || {
        format!(
            "|mean gamma1| {:.4} not below max |gamma1| {:.4}",
            avg.gamma1.abs(),
            largest.gamma1.abs()
        )
    })?;
    let d_avg = cross_asymmetry(&avg, 0x8108);
    let d_max = cross_asymmetry(&largest, 0x8108);
    check(d_avg.abs() < d_max.abs(), || {
        format!("|ΔA| averaged {d_avg:.4} vs single day {d_max:.4}")
    })?;
    Ok(format!(
        "γ̂1 in [{lo:.3}, {hi:.3}] -> mean {:.4} (max |γ̂1| {:.3}); ΔA {d_max:.3} -> {d_avg:.3}",
        avg.gamma1,
        largest.gamma1.abs()
    ))
}

// 9 -------------------------------------------------------------------------

fn delta_calibration() -> Outcome {
    let make = |values: Vec<f64>| {
        let l = (values.len() / 2) as i64;
        QcfCurve::new(p(0.05), p(0.95), (-l..=l).collect(), values, 1000, 1).unwrap()
    };
    let one_sided = make(vec![0.0, 0.0, 0.0, 1.0, -0.2, -0.1, -0.05]);
    let r = asymmetry(&one_sided).map_err(|e| e.to_string())?.delta;
    check(r == -1.0, || format!("zero on negative lags gave {r}"))?;
    let m = asymmetry(&one_sided.mirrored())
        .map_err(|e| e.to_string())?
        .delta;
    check(m == 1.0, || format!("mirror gave {m}"))?;
    let s = asymmetry(&make(vec![-0.05, -0.1, -0.2, 1.0, -0.2, -0.1, -0.05]))
        .map_err(|e| e.to_string())?
        .delta;
    check(s == 0.0, || format!("symmetric curve gave {s}"))?;
    Ok("one-sided -> -1, mirror -> +1, symmetric -> 0".into())
}

// 10 ------------------------------------------------------------------------

/// An opening trade plus trades at `traded` distinct grid seconds.
fn synthetic_day(traded: usize, spacing: usize, extra: bool) -> Vec<TickRecord> {
    let tick = |timestamp: i64, price: f64| TickRecord {
        timestamp,
        price,
        instrument: "SYN".into(),
    };
    let mut ticks = vec![tick(3, 25.0)];
    for i in 0..traded {
        let t = 600 + (i * spacing) as i64;
        ticks.push(tick(t, 25.0 + ((i * 31) % 13) as f64 * 0.01));
        if extra {
            ticks.push(tick(t, 25.5));
        }
    }
    if extra {
        ticks.push(tick(23_000, 99.0));
    }
    ticks
}

fn ingestion_gates() -> Outcome {
    let date = NaiveDate::from_ymd_opt(2007, 5, 14).unwrap();
    let session = SessionConfig::default();
    let run = |ticks: &[TickRecord]| {
        resample_day(ticks, date, "SYN", &session).map_err(|e| e.to_string())
    };
    match run(&synthetic_day(799, 27, false))? {
        DayOutcome::Rejected(r) => check(
            matches!(
                r.reason,
                RejectReason::InsufficientLiquidity {
                    traded_seconds: 799,
                    ..
                }
            ),
            || format!("799: rejected for {}", r.reason),
        )?,
        DayOutcome::Accepted(_) => return Err("day with 799 traded seconds accepted".into()),
    }
    let mut lengths = Vec::new();
    for (traded, spacing, extra) in [
        (800, 27, false),
        (800, 27, true),
        (5000, 4, true),
        (22_200, 1, false),
    ] {
        match run(&synthetic_day(traded, spacing, extra))? {
            DayOutcome::Accepted(d) => {
                check(d.traded_seconds == traded, || {
                    format!("counted {} of {traded}", d.traded_seconds)
                })?;
                lengths.push(d.prices.len());
            }
            DayOutcome::Rejected(r) => {
                return Err(format!("{traded} traded seconds rejected: {}", r.reason))
            }
        }
    }
    check(lengths.iter().all(|&n| n == STANDARD_GRID_LEN), || {
        format!("grid lengths {lengths:?}")
    })?;
    Ok(format!(
        "799 rejected, 800 accepted, {} accepted grids all {STANDARD_GRID_LEN} points",
        lengths.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("worked-example regression", worked_example),
        ("fast/direct oracle equivalence", oracle_equivalence),
        ("invariance suite", invariance_suite),
        ("GARCH null and tail symmetry", garch_null_and_symmetry),
        ("GJR asymmetry direction", gjr_direction),
        ("EGARCH one-sidedness", egarch_one_sided),
        ("GJR parameter recovery", parameter_recovery),
        ("averaging cancellation", averaging_cancellation),
        ("ΔA calibration", delta_calibration),
        ("ingestion gates", ingestion_gates),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {reason}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
