//! On-disk stage artifacts. Every stage reads its predecessor's files and
//! writes its own, so stages are resumable and an AP can be re-run without
//! repeating the whole batch.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::eval::write_atomic;
use crate::preprocess::{GridConfig, Metric, MetricSeries, NormalizationRecord};
use crate::spatial::PredictionMode;
use crate::statlag::LagSelection;

pub fn preprocess_dir(out: &Path, metric: Metric) -> PathBuf {
    out.join("preprocess").join(metric.slug())
}

pub fn correlate_dir(out: &Path, metric: Metric) -> PathBuf {
    out.join("correlate").join(metric.slug())
}

pub fn train_dir(out: &Path, metric: Metric) -> PathBuf {
    out.join("train").join(metric.slug())
}

pub fn evaluate_dir(out: &Path, metric: Metric) -> PathBuf {
    out.join("evaluate").join(metric.slug())
}

pub fn model_file(out: &Path, metric: Metric, ap: &str, kind: &str) -> PathBuf {
    train_dir(out, metric).join("models").join(format!("{ap}__{kind}.model"))
}

pub fn predictions_file(out: &Path, metric: Metric, ap: &str, kind: &str) -> PathBuf {
    train_dir(out, metric)
        .join("predictions")
        .join(format!("{ap}__{kind}.csv"))
}

pub(crate) fn io_error(stage: &'static str, path: &Path, source: std::io::Error) -> PipelineError {
    PipelineError::Io {
        stage,
        path: path.display().to_string(),
        source,
    }
}

pub(crate) fn missing(stage: &'static str, path: &Path) -> PipelineError {
    PipelineError::MissingArtifact {
        stage,
        path: path.display().to_string(),
    }
}

/// Everything later stages need about one metric's preprocessed series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreprocessManifest {
    pub metric: Metric,
    pub period_minutes: u32,
    pub day_start_minute: u32,
    pub day_end_minute: u32,
    pub periods_per_day: usize,
    /// Retained days, common to every AP.
    pub days: Vec<NaiveDate>,
    /// First index outside the normalization/training range.
    pub train_end: usize,
    pub aps: Vec<String>,
    pub normalization: BTreeMap<String, NormalizationRecord>,
    pub pruned_days: BTreeMap<String, Vec<NaiveDate>>,
    pub lags: LagSelection,
    pub max_lag_used: usize,
    /// Seconds of per-AP preprocessing (zeros when timing is disabled).
    pub tct_preprocess: BTreeMap<String, f64>,
    /// APs dropped by this stage, with the reason.
    pub failures: BTreeMap<String, String>,
}

impl PreprocessManifest {
    pub fn grid(&self) -> GridConfig {
        GridConfig {
            period_minutes: self.period_minutes,
            day_start_minute: self.day_start_minute,
            day_end_minute: self.day_end_minute,
        }
    }
}

pub fn write_preprocess(
    out: &Path,
    manifest: &PreprocessManifest,
    series: &BTreeMap<String, MetricSeries>,
) -> Result<(), PipelineError> {
    let dir = preprocess_dir(out, manifest.metric);
    let series_dir = dir.join("series");
    fs::create_dir_all(&series_dir).map_err(|e| io_error("preprocess", &series_dir, e))?;

    for (ap, s) in series {
        let mut body = String::from("day,slot,value,was_missing\n");
        let slots = s.periods_per_day();
        for (n, v) in s.values.iter().enumerate() {
            body.push_str(&format!(
                "{},{},{:.12},{}\n",
                s.days[n / slots].format("%Y-%m-%d"),
                n % slots,
                v,
                u8::from(s.was_missing[n]),
            ));
        }
        let path = series_dir.join(format!("{ap}.csv"));
        write_atomic(&path, body.as_bytes()).map_err(|e| io_error("preprocess", &path, e))?;
    }

    let path = dir.join("manifest.json");
    let json = serde_json::to_vec_pretty(manifest).map_err(PipelineError::Encode)?;
    write_atomic(&path, &json).map_err(|e| io_error("preprocess", &path, e))
}

pub fn read_preprocess(
    out: &Path,
    metric: Metric,
) -> Result<(PreprocessManifest, BTreeMap<String, MetricSeries>), PipelineError> {
    let dir = preprocess_dir(out, metric);
    let manifest_path = dir.join("manifest.json");
    if !manifest_path.exists() {
        return Err(missing("correlate/train", &manifest_path));
    }
    let manifest: PreprocessManifest = serde_json::from_slice(
        &fs::read(&manifest_path).map_err(|e| io_error("read-preprocess", &manifest_path, e))?,
    )
    .map_err(PipelineError::Encode)?;

    let grid = manifest.grid();
    let mut series = BTreeMap::new();
    for ap in &manifest.aps {
        let path = dir.join("series").join(format!("{ap}.csv"));
        if !path.exists() {
            return Err(missing("correlate/train", &path));
        }
        let text = fs::read(&path).map_err(|e| io_error("read-preprocess", &path, e))?;
        let text = String::from_utf8_lossy(&text);
        let mut values = Vec::new();
        let mut was_missing = Vec::new();
        for line in text.lines().skip(1) {
            let mut cells = line.split(',');
            let (_day, _slot, value, missing_flag) = (
                cells.next(),
                cells.next(),
                cells.next().and_then(|c| c.parse::<f64>().ok()),
                cells.next().and_then(|c| c.parse::<u8>().ok()),
            );
            let (Some(value), Some(missing_flag)) = (value, missing_flag) else {
                return Err(PipelineError::Corrupt {
                    path: path.display().to_string(),
                    detail: format!("bad series row `{line}`"),
                });
            };
            values.push(value);
            was_missing.push(missing_flag != 0);
        }
        let expected = manifest.days.len() * manifest.periods_per_day;
        if values.len() != expected {
            return Err(PipelineError::Corrupt {
                path: path.display().to_string(),
                detail: format!("{} rows, manifest implies {expected}", values.len()),
            });
        }
        series.insert(
            ap.clone(),
            MetricSeries {
                ap_name: ap.clone(),
                metric,
                grid: grid.clone(),
                days: manifest.days.clone(),
                values,
                was_missing,
            },
        );
    }
    Ok((manifest, series))
}

/// Per-AP neighbour decisions of the correlate stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelateManifest {
    pub metric: Metric,
    pub threshold: f64,
    pub m_max: usize,
    /// Selected neighbours (correlation > threshold), descending, per AP.
    pub neighbors: BTreeMap<String, Vec<(String, f64)>>,
    pub modes: BTreeMap<String, PredictionMode>,
    pub warnings: Vec<String>,
}

pub fn write_correlate(
    out: &Path,
    manifest: &CorrelateManifest,
    correlation_csv: &str,
) -> Result<(), PipelineError> {
    let dir = correlate_dir(out, manifest.metric);
    fs::create_dir_all(&dir).map_err(|e| io_error("correlate", &dir, e))?;

    let path = dir.join("correlation.csv");
    write_atomic(&path, correlation_csv.as_bytes()).map_err(|e| io_error("correlate", &path, e))?;

    let mut neighbors = String::from("ap,neighbor,correlation\n");
    for (ap, list) in &manifest.neighbors {
        for (other, c) in list {
            neighbors.push_str(&format!("{ap},{other},{c:.6}\n"));
        }
    }
    let path = dir.join("neighbors.csv");
    write_atomic(&path, neighbors.as_bytes()).map_err(|e| io_error("correlate", &path, e))?;

    let mut modes = String::from("ap,mode,m_count\n");
    for (ap, mode) in &manifest.modes {
        modes.push_str(&format!(
            "{ap},{mode},{}\n",
            manifest.neighbors.get(ap).map(Vec::len).unwrap_or(0)
        ));
    }
    let path = dir.join("modes.csv");
    write_atomic(&path, modes.as_bytes()).map_err(|e| io_error("correlate", &path, e))?;

    let path = dir.join("manifest.json");
    let json = serde_json::to_vec_pretty(manifest).map_err(PipelineError::Encode)?;
    write_atomic(&path, &json).map_err(|e| io_error("correlate", &path, e))
}

pub fn read_correlate(out: &Path, metric: Metric) -> Result<CorrelateManifest, PipelineError> {
    let path = correlate_dir(out, metric).join("manifest.json");
    if !path.exists() {
        return Err(missing("train", &path));
    }
    serde_json::from_slice(&fs::read(&path).map_err(|e| io_error("read-correlate", &path, e))?)
        .map_err(PipelineError::Encode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainStatus {
    Ok,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainEntry {
    pub status: TrainStatus,
    pub reason: Option<String>,
    pub mode: PredictionMode,
    pub lag: usize,
    pub input_len: usize,
    pub tct_preprocess_seconds: f64,
    pub tct_fit_seconds: f64,
    pub pct_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainManifest {
    pub metric: Metric,
    /// ap -> model kind -> outcome.
    pub entries: BTreeMap<String, BTreeMap<String, TrainEntry>>,
}

pub fn write_train(out: &Path, manifest: &TrainManifest) -> Result<(), PipelineError> {
    let dir = train_dir(out, manifest.metric);
    fs::create_dir_all(&dir).map_err(|e| io_error("train", &dir, e))?;
    let path = dir.join("manifest.json");
    let json = serde_json::to_vec_pretty(manifest).map_err(PipelineError::Encode)?;
    write_atomic(&path, &json).map_err(|e| io_error("train", &path, e))
}

pub fn read_train(out: &Path, metric: Metric) -> Result<TrainManifest, PipelineError> {
    let path = train_dir(out, metric).join("manifest.json");
    if !path.exists() {
        return Err(missing("evaluate", &path));
    }
    serde_json::from_slice(&fs::read(&path).map_err(|e| io_error("read-train", &path, e))?)
        .map_err(PipelineError::Encode)
}

/// Validation predictions of one (ap, kind) fit, normalized scale.
pub fn write_predictions(
    path: &Path,
    rows: &[(usize, chrono::NaiveDateTime, f64, f64)],
) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_error("train", parent, e))?;
    }
    let mut body = String::from("window_index,timestamp,actual,predicted\n");
    for (idx, ts, actual, predicted) in rows {
        body.push_str(&format!(
            "{},{},{:.12},{:.12}\n",
            idx,
            ts.format("%Y-%m-%dT%H:%M"),
            actual,
            predicted
        ));
    }
    write_atomic(path, body.as_bytes()).map_err(|e| io_error("train", path, e))
}

pub fn read_predictions(
    path: &Path,
) -> Result<Vec<(usize, chrono::NaiveDateTime, f64, f64)>, PipelineError> {
    if !path.exists() {
        return Err(missing("evaluate", path));
    }
    let text = fs::read_to_string(path).map_err(|e| io_error("read-predictions", path, e))?;
    let mut rows = Vec::new();
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let parsed = (|| {
            Some((
                cells.first()?.parse::<usize>().ok()?,
                chrono::NaiveDateTime::parse_from_str(cells.get(1)?, "%Y-%m-%dT%H:%M").ok()?,
                cells.get(2)?.parse::<f64>().ok()?,
                cells.get(3)?.parse::<f64>().ok()?,
            ))
        })();
        match parsed {
            Some(row) => rows.push(row),
            None => {
                return Err(PipelineError::Corrupt {
                    path: path.display().to_string(),
                    detail: format!("bad prediction row `{line}`"),
                })
            }
        }
    }
    Ok(rows)
}
