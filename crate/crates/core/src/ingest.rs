//! Tick data preparation: previous-tick fill onto a one-second grid, session
//! trimming, the liquidity filter, simple returns and an equally weighted
//! index.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{SeriesError, TimeSeries};

/// Grid length of a standard trading day after trimming (seconds).
pub const STANDARD_GRID_LEN: usize = 22_200;
/// Seconds dropped at each end of the session.
pub const STANDARD_TRIM: i64 = 600;
/// Minimum number of distinct traded seconds for a day to be kept.
pub const STANDARD_MIN_TRADED_SECONDS: usize = 800;

pub const INDEX_INSTRUMENT: &str = "INDEX";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("ticks not sorted by time: {prev} followed by {next}")]
    Unsorted { prev: i64, next: i64 },
    #[error("non-positive or non-finite price {price} at second {timestamp}")]
    BadPrice { timestamp: i64, price: f64 },
    #[error("tick at second {0} lies outside the session")]
    OutsideSession(i64),
    #[error("invalid session: {0}")]
    BadSession(String),
    #[error("return horizon {horizon} does not fit a grid of {len} seconds")]
    HorizonTooLong { horizon: usize, len: usize },
    #[error("stride and horizon must be positive")]
    ZeroStep,
    #[error("empty input")]
    EmptyInput,
    #[error("days do not share a date and grid: {0}")]
    GridMismatch(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// One trade, timestamped in whole seconds since the session open.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub timestamp: i64,
    pub price: f64,
    pub instrument: String,
}

/// Session bounds (inclusive open, exclusive close), trim and liquidity
/// threshold. The grid covers `[open + trim, close - trim)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub open: i64,
    pub close: i64,
    pub trim: i64,
    pub min_traded_seconds: usize,
}

impl Default for SessionConfig {
    /// 23400-second session trimmed by ten minutes at both ends, giving the
    /// 22200-second grid, with the 800-second liquidity threshold.
    fn default() -> Self {
        Self {
            open: 0,
            close: 23_400,
            trim: STANDARD_TRIM,
            min_traded_seconds: STANDARD_MIN_TRADED_SECONDS,
        }
    }
}

impl SessionConfig {
    pub fn grid_start(&self) -> i64 {
        self.open + self.trim
    }

    pub fn grid_len(&self) -> usize {
        (self.close - self.open - 2 * self.trim).max(0) as usize
    }

    fn validate(&self) -> Result<(), IngestError> {
        if self.trim < 0 || self.close - self.open - 2 * self.trim < 2 {
            return Err(IngestError::BadSession(format!(
                "open {} close {} trim {} leaves fewer than 2 grid seconds",
                self.open, self.close, self.trim
            )));
        }
        Ok(())
    }
}

/// One instrument-day of prices on the trimmed one-second grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradingDay {
    pub instrument: String,
    pub date: NaiveDate,
    pub prices: Vec<f64>,
    /// Distinct grid seconds that had at least one trade before filling.
    pub traded_seconds: usize,
}

impl TradingDay {
    pub fn id(&self) -> String {
        format!("{}_{}", self.date, self.instrument)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    InsufficientLiquidity {
        traded_seconds: usize,
        required: usize,
    },
    NoOpeningPrice,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::InsufficientLiquidity { .. } => f.write_str("insufficient liquidity"),
            RejectReason::NoOpeningPrice => f.write_str("no price before first grid second"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub instrument: String,
    pub date: NaiveDate,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DayOutcome {
    Accepted(TradingDay),
    Rejected(Rejection),
}

/// Previous-tick fill of one instrument-day onto the session grid.
///
/// Within a second the last trade wins. Trades in the trimmed opening
/// period seed the first grid price; trades in the trimmed closing period are
/// ignored. Days short of the liquidity threshold, or with no trade at or
/// before the first grid second, are rejected rather than failed.
pub fn resample_day(
    ticks: &[TickRecord],
    date: NaiveDate,
    instrument: &str,
    session: &SessionConfig,
) -> Result<DayOutcome, IngestError> {
    session.validate()?;
    for w in ticks.windows(2) {
        if w[1].timestamp < w[0].timestamp {
            return Err(IngestError::Unsorted {
                prev: w[0].timestamp,
                next: w[1].timestamp,
            });
        }
    }
    for t in ticks {
        if !(t.price.is_finite() && t.price > 0.0) {
            return Err(IngestError::BadPrice {
                timestamp: t.timestamp,
                price: t.price,
            });
        }
        if t.timestamp < session.open || t.timestamp >= session.close {
            return Err(IngestError::OutsideSession(t.timestamp));
        }
    }

    let start = session.grid_start();
    let len = session.grid_len();
    let end = start + len as i64;
    let reject = |reason| {
        Ok(DayOutcome::Rejected(Rejection {
            instrument: instrument.to_string(),
            date,
            reason,
        }))
    };

    let mut cursor = ticks.partition_point(|t| t.timestamp < start);
    let mut last = cursor.checked_sub(1).map(|i| ticks[i].price);
    let mut prices = Vec::with_capacity(len);
    let mut traded_seconds = 0;
    for second in start..end {
        let mut traded = false;
        while cursor < ticks.len() && ticks[cursor].timestamp == second {
            last = Some(ticks[cursor].price);
            cursor += 1;
            traded = true;
        }
        traded_seconds += usize::from(traded);
        match last {
            Some(p) => prices.push(p),
            None => return reject(RejectReason::NoOpeningPrice),
        }
    }

    if traded_seconds < session.min_traded_seconds {
        return reject(RejectReason::InsufficientLiquidity {
            traded_seconds,
            required: session.min_traded_seconds,
        });
    }
    Ok(DayOutcome::Accepted(TradingDay {
        instrument: instrument.to_string(),
        date,
        prices,
        traded_seconds,
    }))
}

/// Simple returns `(S(t + h) - S(t)) / S(t)` for `t = 0, stride, 2 stride, ...`
/// while `t + h` stays on the grid. `stride = 1` gives overlapping returns,
/// `stride = h` non-overlapping ones (369 for one-minute returns on the
/// standard grid).
pub fn compute_returns(
    day: &TradingDay,
    horizon_seconds: usize,
    stride_seconds: usize,
) -> Result<TimeSeries, IngestError> {
    if horizon_seconds == 0 || stride_seconds == 0 {
        return Err(IngestError::ZeroStep);
    }
    let s = &day.prices;
    if horizon_seconds >= s.len() {
        return Err(IngestError::HorizonTooLong {
            horizon: horizon_seconds,
            len: s.len(),
        });
    }
    let returns: Vec<f64> = (0..s.len() - horizon_seconds)
        .step_by(stride_seconds)
        .map(|t| (s[t + horizon_seconds] - s[t]) / s[t])
        .collect();
    Ok(TimeSeries::new(returns, stride_seconds as f64, day.id())?)
}

/// Equally weighted index: at each second, the mean over stocks of the price
/// rebased to 1 at the first grid second. Stocks are summed in a canonical
/// order so the result does not depend on input order.
pub fn build_index(days: &[TradingDay]) -> Result<TradingDay, IngestError> {
    let first = days.first().ok_or(IngestError::EmptyInput)?;
    for d in days {
        if d.date != first.date || d.prices.len() != first.prices.len() {
            return Err(IngestError::GridMismatch(format!(
                "{} has {} prices on {}, expected {} on {}",
                d.instrument,
                d.prices.len(),
                d.date,
                first.prices.len(),
                first.date
            )));
        }
    }
    let mut order: Vec<&TradingDay> = days.iter().collect();
    order.sort_by(|a, b| {
        a.instrument.cmp(&b.instrument).then_with(|| {
            a.prices
                .iter()
                .zip(&b.prices)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let k = order.len() as f64;
    let prices = (0..first.prices.len())
        .map(|t| order.iter().map(|d| d.prices[t] / d.prices[0]).sum::<f64>() / k)
        .collect();
    Ok(TradingDay {
        instrument: INDEX_INSTRUMENT.to_string(),
        date: first.date,
        prices,
        traded_seconds: days.iter().map(|d| d.traded_seconds).min().unwrap_or(0),
    })
}

/// A parsed tick row with its calendar date.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedTick {
    pub date: NaiveDate,
    pub tick: TickRecord,
}

#[derive(Debug, Deserialize)]
struct TickRow {
    date: String,
    time_seconds: i64,
    instrument: String,
    price: f64,
    #[serde(default)]
    regular: Option<String>,
}

fn is_regular(flag: Option<&str>) -> Result<bool, String> {
    match flag.map(str::trim) {
        None | Some("") => Ok(true),
        Some(v) => match v.to_ascii_lowercase().as_str() {
            "1" | "true" | "t" | "y" | "yes" => Ok(true),
            "0" | "false" | "f" | "n" | "no" => Ok(false),
            other => Err(format!("unrecognized regular flag '{other}'")),
        },
    }
}

/// Reads `date,time_seconds,instrument,price[,regular]` rows (header
/// required). Rows flagged as non-regular are dropped.
pub fn read_ticks<R: Read>(reader: R) -> Result<Vec<DatedTick>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<TickRow>() {
        let row = row.map_err(|e| IngestError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = out.len() as u64 + 2;
        let regular = is_regular(row.regular.as_deref())
            .map_err(|message| IngestError::Parse { line, message })?;
        if !regular {
            continue;
        }
        let date =
            NaiveDate::parse_from_str(&row.date, "%Y-%m-%d").map_err(|e| IngestError::Parse {
                line,
                message: format!("bad date '{}': {e}", row.date),
            })?;
        out.push(DatedTick {
            date,
            tick: TickRecord {
                timestamp: row.time_seconds,
                price: row.price,
                instrument: row.instrument,
            },
        });
    }
    Ok(out)
}

/// Groups ticks by `(date, instrument)` preserving file order within a group.
pub fn group_ticks(ticks: Vec<DatedTick>) -> BTreeMap<(NaiveDate, String), Vec<TickRecord>> {
    let mut groups: BTreeMap<(NaiveDate, String), Vec<TickRecord>> = BTreeMap::new();
    for t in ticks {
        groups
            .entry((t.date, t.tick.instrument.clone()))
            .or_default()
            .push(t.tick);
    }
    groups
}

/// Parses, groups and resamples a whole tick file. Groups are processed in
/// `(date, instrument)` order.
pub fn ingest<R: Read>(reader: R, session: &SessionConfig) -> Result<Vec<DayOutcome>, IngestError> {
    group_ticks(read_ticks(reader)?)
        .into_iter()
        .map(|((date, instrument), ticks)| resample_day(&ticks, date, &instrument, session))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date() -> NaiveDate {
        NaiveDate::from_ymd_opt(2007, 3, 1).unwrap()
    }

    fn tick(timestamp: i64, price: f64) -> TickRecord {
        TickRecord {
            timestamp,
            price,
            instrument: "X".into(),
        }
    }

    fn toy_session() -> SessionConfig {
        SessionConfig {
            open: 0,
            close: 6,
            trim: 0,
            min_traded_seconds: 1,
        }
    }

    fn accepted(o: DayOutcome) -> TradingDay {
        match o {
            DayOutcome::Accepted(d) => d,
            DayOutcome::Rejected(r) => panic!("rejected: {}", r.reason),
        }
    }

    #[test]
    fn toy_fill() {
        let ticks = [tick(0, 10.0), tick(3, 11.0)];
        let d = accepted(resample_day(&ticks, date(), "X", &toy_session()).unwrap());
        assert_eq!(d.prices, vec![10.0, 10.0, 10.0, 11.0, 11.0, 11.0]);
        assert_eq!(d.traded_seconds, 2);
    }

    #[test]
    fn last_trade_in_second_wins_and_opening_seeds() {
        let s = SessionConfig {
            open: 0,
            close: 10,
            trim: 2,
            min_traded_seconds: 1,
        };
        let ticks = [tick(1, 5.0), tick(4, 6.0), tick(4, 7.0), tick(9, 100.0)];
        let d = accepted(resample_day(&ticks, date(), "X", &s).unwrap());
        assert_eq!(d.prices, vec![5.0, 5.0, 7.0, 7.0, 7.0, 7.0]);
        assert_eq!(d.traded_seconds, 1);
    }

    #[test]
    fn no_opening_price_is_rejected() {
        let ticks = [tick(2, 5.0)];
        match resample_day(&ticks, date(), "X", &toy_session()).unwrap() {
            DayOutcome::Rejected(r) => assert_eq!(r.reason, RejectReason::NoOpeningPrice),
            DayOutcome::Accepted(_) => panic!("should reject"),
        }
    }

    #[test]
    fn data_errors() {
        let s = toy_session();
        assert!(matches!(
            resample_day(&[tick(3, 1.0), tick(1, 1.0)], date(), "X", &s),
            Err(IngestError::Unsorted { .. })
        ));
        assert!(matches!(
            resample_day(&[tick(0, 0.0)], date(), "X", &s),
            Err(IngestError::BadPrice { .. })
        ));
        assert!(matches!(
            resample_day(&[tick(6, 1.0)], date(), "X", &s),
            Err(IngestError::OutsideSession(6))
        ));
    }

    #[test]
    fn standard_session_grid() {
        let s = SessionConfig::default();
        assert_eq!(s.grid_len(), STANDARD_GRID_LEN);
        let ticks: Vec<TickRecord> = (0..23_400)
            .map(|t| tick(t, 50.0 + (t % 7) as f64))
            .collect();
        let d = accepted(resample_day(&ticks, date(), "X", &s).unwrap());
        assert_eq!(d.prices.len(), STANDARD_GRID_LEN);
        assert_eq!(d.traded_seconds, STANDARD_GRID_LEN);
        assert_eq!(d.prices[0], ticks[600].price);
    }

    fn day(prices: Vec<f64>, name: &str) -> TradingDay {
        TradingDay {
            instrument: name.into(),
            date: date(),
            prices,
            traded_seconds: 1000,
        }
    }

    #[test]
    fn returns_counts_and_values() {
        let d = day(vec![100.0; STANDARD_GRID_LEN], "X");
        let r = compute_returns(&d, 60, 60).unwrap();
        assert_eq!(r.len(), 369);
        assert!(r.values().iter().all(|&v| v == 0.0));
        assert_eq!(
            compute_returns(&d, 60, 1).unwrap().len(),
            STANDARD_GRID_LEN - 60
        );

        let two = day(vec![100.0, 101.0], "X");
        assert!(compute_returns(&two, 1, 1).is_err());
        let three = day(vec![100.0, 101.0, 99.0], "X");
        let r = compute_returns(&three, 1, 1).unwrap();
        assert!((r.values()[0] - 0.01).abs() < 1e-15);
        assert!(matches!(
            compute_returns(&three, 3, 1),
            Err(IngestError::HorizonTooLong { .. })
        ));
    }

    #[test]
    fn return_start_points_by_enumeration() {
        let len = STANDARD_GRID_LEN;
        let prices: Vec<f64> = (0..len).map(|i| 100.0 + i as f64).collect();
        let r = compute_returns(&day(prices.clone(), "X"), 60, 60).unwrap();
        let mut expected = Vec::new();
        let mut t = 0;
        while t + 60 < len {
            expected.push((prices[t + 60] - prices[t]) / prices[t]);
            t += 60;
        }
        assert_eq!(r.values(), expected.as_slice());
        assert_eq!(t - 60, 22_080);
    }

    #[test]
    fn index_examples() {
        let a = day(vec![10.0, 11.0, 12.0, 9.0], "A");
        let idx = build_index(std::slice::from_ref(&a)).unwrap();
        assert_eq!(idx.prices, vec![1.0, 1.1, 1.2, 0.9]);
        assert_eq!(idx.instrument, INDEX_INSTRUMENT);

        let up = day(vec![50.0, 55.0, 60.0, 45.0], "U");
        let down = day(vec![20.0, 18.0, 16.0, 22.0], "D");
        let idx = build_index(&[up, down]).unwrap();
        assert!(idx.prices.iter().all(|&p| (p - 1.0).abs() < 1e-15));

        let flat: Vec<TradingDay> = [3.0, 70.0, 1234.5]
            .iter()
            .enumerate()
            .map(|(i, &p)| day(vec![p; 5], &format!("S{i}")))
            .collect();
        assert!(build_index(&flat).unwrap().prices.iter().all(|&p| p == 1.0));
        assert_eq!(build_index(&[]), Err(IngestError::EmptyInput));
        let short = day(vec![1.0; 3], "Z");
        assert!(build_index(&[a, short]).is_err());
    }

    #[test]
    fn parses_csv_and_drops_irregular() {
        let csv = "date,time_seconds,instrument,price,regular\n\
                   2007-03-01,0,AAA,10.0,1\n\
                   2007-03-01,1,AAA,99.0,0\n\
                   2007-03-01,3,AAA,11.0,true\n\
                   2007-03-01,0,BBB,5.0,\n";
        let ticks = read_ticks(csv.as_bytes()).unwrap();
        assert_eq!(ticks.len(), 3);
        let groups = group_ticks(ticks);
        assert_eq!(groups.len(), 2);
        let outcomes = ingest(csv.as_bytes(), &toy_session()).unwrap();
        let first = accepted(outcomes[0].clone());
        assert_eq!(first.instrument, "AAA");
        assert_eq!(first.prices, vec![10.0, 10.0, 10.0, 11.0, 11.0, 11.0]);
    }

    #[test]
    fn parse_errors_carry_line() {
        let csv = "date,time_seconds,instrument,price\n2007-03-01,x,AAA,10.0\n";
        assert!(matches!(
            read_ticks(csv.as_bytes()),
            Err(IngestError::Parse { .. })
        ));
        let csv = "date,time_seconds,instrument,price\n2007-13-01,0,AAA,10.0\n";
        assert!(matches!(
            read_ticks(csv.as_bytes()),
            Err(IngestError::Parse { .. })
        ));
    }
}
