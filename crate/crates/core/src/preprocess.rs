//! Metric derivation, gridding, backfill/prune and normalization.
//!
//! Raw counters become two per-AP series: traffic load (TxC, later divided
//! by the maximum observed value) and transmission failures
//! (FTx/(STx+STxR)). Samples are binned onto a fixed intra-day grid of
//! `periods_per_day` slots of `period_minutes` each, weekdays only. Runs of
//! up to `missing_run_limit` missing slots are filled with the previous
//! value; a day containing a longer run is dropped entirely.

use std::ops::Range;

use chrono::{Datelike, NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::RawCounterRecord;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("grid config invalid: {0}")]
    Config(String),
    #[error("no samples to grid for {ap}/{metric}")]
    NoSamples { ap: String, metric: Metric },
    #[error("all {count} days of {ap}/{metric} pruned for missing data")]
    AllDaysPruned {
        ap: String,
        metric: Metric,
        count: usize,
    },
    #[error("normalization range {range:?} of {ap}/{metric} is all zero; MaxV undefined")]
    DegenerateNormalization {
        ap: String,
        metric: Metric,
        range: Range<usize>,
    },
    #[error("normalization range {range:?} out of bounds for series of length {len}")]
    RangeOutOfBounds { range: Range<usize>, len: usize },
    #[error("series {ap}/{metric} still has missing values; backfill first")]
    StillMissing { ap: String, metric: Metric },
}

/// Which derived metric a series carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "traffic", alias = "traffic_load")]
    TrafficLoad,
    #[serde(rename = "failures")]
    Failures,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::TrafficLoad, Metric::Failures];

    /// Stable short name used in file paths and CSV cells.
    pub fn slug(self) -> &'static str {
        match self {
            Metric::TrafficLoad => "traffic",
            Metric::Failures => "failures",
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.slug())
    }
}

impl std::str::FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "traffic" | "traffic_load" => Ok(Metric::TrafficLoad),
            "failures" => Ok(Metric::Failures),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

/// Intra-day measurement grid: slot starts run from `day_start_minute` to
/// `day_end_minute` inclusive, `period_minutes` apart, weekdays only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub period_minutes: u32,
    pub day_start_minute: u32,
    pub day_end_minute: u32,
}

impl Default for GridConfig {
    fn default() -> Self {
        // 05:30..=22:00 in 30-minute periods: 34 slots per day
        GridConfig {
            period_minutes: 30,
            day_start_minute: 5 * 60 + 30,
            day_end_minute: 22 * 60,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        if self.period_minutes == 0 {
            return Err(PreprocessError::Config("period_minutes must be > 0".into()));
        }
        if self.day_end_minute <= self.day_start_minute {
            return Err(PreprocessError::Config(
                "day window end must be after start".into(),
            ));
        }
        if self.day_end_minute >= 24 * 60 {
            return Err(PreprocessError::Config(
                "day window must end before midnight".into(),
            ));
        }
        let span = self.day_end_minute - self.day_start_minute;
        if span % self.period_minutes != 0 {
            return Err(PreprocessError::Config(format!(
                "day window of {span} minutes is not divisible by period {}",
                self.period_minutes
            )));
        }
        Ok(())
    }

    /// Slot starts per day (both window endpoints carry a slot).
    pub fn periods_per_day(&self) -> usize {
        ((self.day_end_minute - self.day_start_minute) / self.period_minutes) as usize + 1
    }

    /// Slot index for a minute-of-day, if inside the window.
    fn slot_of_minute(&self, minute: u32) -> Option<usize> {
        if minute < self.day_start_minute {
            return None;
        }
        let offset = minute - self.day_start_minute;
        let slot = (offset / self.period_minutes) as usize;
        (slot < self.periods_per_day()).then_some(slot)
    }

    pub fn slot_time(&self, slot: usize) -> NaiveTime {
        let minute = self.day_start_minute + slot as u32 * self.period_minutes;
        NaiveTime::from_hms_opt(minute / 60, minute % 60, 0).expect("slot inside day")
    }
}

/// A gridded series that may still contain missing slots.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedSeries {
    pub ap_name: String,
    pub metric: Metric,
    pub grid: GridConfig,
    pub days: Vec<NaiveDate>,
    /// `days.len() * periods_per_day` slots, `None` where no sample landed.
    pub values: Vec<Option<f64>>,
}

impl GriddedSeries {
    pub fn periods_per_day(&self) -> usize {
        self.grid.periods_per_day()
    }

    pub fn day_count(&self) -> usize {
        self.days.len()
    }

    fn day_slice(&self, d: usize) -> &[Option<f64>] {
        let s = self.periods_per_day();
        &self.values[d * s..(d + 1) * s]
    }

    /// Drops every day not in `keep` (used to align APs on common days).
    pub fn restrict_to_days(&self, keep: &[NaiveDate]) -> GriddedSeries {
        let s = self.periods_per_day();
        let mut days = Vec::new();
        let mut values = Vec::new();
        for (d, date) in self.days.iter().enumerate() {
            if keep.contains(date) {
                days.push(*date);
                values.extend_from_slice(&self.values[d * s..(d + 1) * s]);
            }
        }
        GriddedSeries {
            ap_name: self.ap_name.clone(),
            metric: self.metric,
            grid: self.grid.clone(),
            days,
            values,
        }
    }
}

/// A dense (backfilled) metric series on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub ap_name: String,
    pub metric: Metric,
    pub grid: GridConfig,
    pub days: Vec<NaiveDate>,
    pub values: Vec<f64>,
    /// Slots that were originally missing and got filled.
    pub was_missing: Vec<bool>,
}

impl MetricSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn periods_per_day(&self) -> usize {
        self.grid.periods_per_day()
    }

    pub fn day_count(&self) -> usize {
        self.days.len()
    }

    /// Maps a flat position to its (day, slot) pair.
    pub fn day_slot(&self, n: usize) -> (usize, usize) {
        let s = self.periods_per_day();
        (n / s, n % s)
    }

    pub fn timestamp(&self, n: usize) -> NaiveDateTime {
        let (d, slot) = self.day_slot(n);
        self.days[d].and_time(self.grid.slot_time(slot))
    }
}

/// Per-series scale record kept for de-normalization at prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRecord {
    pub ap_name: String,
    pub metric: Metric,
    pub max_value: f64,
    pub computed_over: (usize, usize),
}

/// Traffic-load numerator: the raw transmitted-packet count.
pub fn derive_traffic_raw(record: &RawCounterRecord) -> f64 {
    record.tx_count as f64
}

/// Failure ratio FTx/(STx+STxR). An idle period (all zero) yields 0; a
/// period with failures but no successes uses denominator 1.
pub fn derive_failures_raw(record: &RawCounterRecord) -> f64 {
    let denom = record.success_tx + record.success_retx;
    if denom == 0 {
        if record.failed_tx == 0 {
            0.0
        } else {
            record.failed_tx as f64
        }
    } else {
        record.failed_tx as f64 / denom as f64
    }
}

/// Bins time-ordered samples onto the grid.
///
/// A sample lands in the slot whose start is the largest grid instant not
/// after its timestamp; several samples in one slot keep the last; weekend
/// and out-of-window samples are dropped. Days covered run from the first
/// to the last weekday with samples, inclusive; slots without samples are
/// missing.
pub fn resample_to_grid(
    ap_name: &str,
    metric: Metric,
    samples: &[(NaiveDateTime, f64)],
    grid: &GridConfig,
) -> Result<GriddedSeries, PreprocessError> {
    grid.validate()?;
    let window_end = grid.day_end_minute + grid.period_minutes; // last slot covers one period
    let usable: Vec<(NaiveDate, usize, f64)> = samples
        .iter()
        .filter(|(ts, _)| !is_weekend(ts.date()))
        .filter(|(ts, _)| {
            let minute = ts.time().hour() * 60 + ts.time().minute();
            minute < window_end
        })
        .filter_map(|(ts, v)| {
            let minute = ts.time().hour() * 60 + ts.time().minute();
            grid.slot_of_minute(minute).map(|slot| (ts.date(), slot, *v))
        })
        .collect();
    if usable.is_empty() {
        return Err(PreprocessError::NoSamples {
            ap: ap_name.to_string(),
            metric,
        });
    }

    let first = usable.iter().map(|(d, _, _)| *d).min().unwrap();
    let last = usable.iter().map(|(d, _, _)| *d).max().unwrap();
    let days: Vec<NaiveDate> = first
        .iter_days()
        .take_while(|d| *d <= last)
        .filter(|d| !is_weekend(*d))
        .collect();

    let per_day = grid.periods_per_day();
    let mut values = vec![None; days.len() * per_day];
    for (date, slot, v) in usable {
        let d = days.iter().position(|x| *x == date).expect("date enumerated");
        values[d * per_day + slot] = Some(v); // later samples overwrite
    }
    Ok(GriddedSeries {
        ap_name: ap_name.to_string(),
        metric,
        grid: grid.clone(),
        days,
        values,
    })
}

pub fn is_weekend(date: NaiveDate) -> bool {
    matches!(date.weekday(), chrono::Weekday::Sat | chrono::Weekday::Sun)
}

/// Days containing a run of more than `run_limit` consecutive missing slots.
pub fn days_to_prune(series: &GriddedSeries, run_limit: usize) -> Vec<NaiveDate> {
    let mut pruned = Vec::new();
    for (d, date) in series.days.iter().enumerate() {
        let mut run = 0usize;
        let mut worst = 0usize;
        for v in series.day_slice(d) {
            if v.is_none() {
                run += 1;
                worst = worst.max(run);
            } else {
                run = 0;
            }
        }
        if worst > run_limit {
            pruned.push(*date);
        }
    }
    pruned
}

/// Fills short missing runs with the previous value and removes days whose
/// missing runs exceed `run_limit` slots.
///
/// Fill values carry across retained-day boundaries; leading missing slots
/// of the very first retained day are filled from the first later value of
/// that day (there is no previous period to copy).
pub fn backfill_and_prune(
    series: &GriddedSeries,
    run_limit: usize,
) -> Result<(MetricSeries, Vec<NaiveDate>), PreprocessError> {
    let pruned = days_to_prune(series, run_limit);
    let kept: Vec<NaiveDate> = series
        .days
        .iter()
        .copied()
        .filter(|d| !pruned.contains(d))
        .collect();
    if kept.is_empty() {
        return Err(PreprocessError::AllDaysPruned {
            ap: series.ap_name.clone(),
            metric: series.metric,
            count: series.days.len(),
        });
    }
    let restricted = series.restrict_to_days(&kept);

    let mut values = Vec::with_capacity(restricted.values.len());
    let mut was_missing = Vec::with_capacity(restricted.values.len());
    let mut previous: Option<f64> = None;
    let mut deferred = 0usize; // leading gap before the first observed value
    for v in &restricted.values {
        match v {
            Some(x) => {
                if deferred > 0 {
                    // first observed value fills the leading gap
                    for _ in 0..deferred {
                        values.push(*x);
                        was_missing.push(true);
                    }
                    deferred = 0;
                }
                values.push(*x);
                was_missing.push(false);
                previous = Some(*x);
            }
            None => match previous {
                Some(p) => {
                    values.push(p);
                    was_missing.push(true);
                }
                None => deferred += 1,
            },
        }
    }
    debug_assert_eq!(deferred, 0, "a retained day cannot be fully missing");

    Ok((
        MetricSeries {
            ap_name: restricted.ap_name,
            metric: restricted.metric,
            grid: restricted.grid,
            days: restricted.days,
            values,
            was_missing,
        },
        pruned,
    ))
}

/// Divides every value by the maximum over `range` and records that maximum.
pub fn normalize(
    series: &MetricSeries,
    range: Range<usize>,
) -> Result<(MetricSeries, NormalizationRecord), PreprocessError> {
    normalize_with_max(series, range.clone(), max_over(series, range)?)
}

/// Maximum of `series` over `range` (the MaxV candidate).
pub fn max_over(series: &MetricSeries, range: Range<usize>) -> Result<f64, PreprocessError> {
    if range.start >= range.end || range.end > series.len() {
        return Err(PreprocessError::RangeOutOfBounds {
            range,
            len: series.len(),
        });
    }
    Ok(series.values[range]
        .iter()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b)))
}

/// Normalization against an externally supplied maximum (used when scaling
/// several APs by a global maximum).
pub fn normalize_with_max(
    series: &MetricSeries,
    range: Range<usize>,
    max_value: f64,
) -> Result<(MetricSeries, NormalizationRecord), PreprocessError> {
    if max_value <= 0.0 {
        return Err(PreprocessError::DegenerateNormalization {
            ap: series.ap_name.clone(),
            metric: series.metric,
            range,
        });
    }
    let mut out = series.clone();
    for v in &mut out.values {
        *v /= max_value;
    }
    Ok((
        out,
        NormalizationRecord {
            ap_name: series.ap_name.clone(),
            metric: series.metric,
            max_value,
            computed_over: (range.start, range.end),
        },
    ))
}
