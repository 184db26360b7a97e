//! Accuracy metrics, phase timing, per-AP aggregation and report emission.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::ModelKind;
use crate::preprocess::Metric;
use crate::spatial::PredictionMode;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {left} actual vs {right} predicted")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} points, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("R2 undefined: actual series is constant")]
    ConstantActual,
    #[error("cannot aggregate an empty report list")]
    EmptyAggregate,
    #[error("cannot aggregate mixed {0}")]
    MixedAggregate(&'static str),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn check_lengths(actual: &[f64], predicted: &[f64], min: usize) -> Result<(), EvalError> {
    if actual.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if actual.len() < min {
        return Err(EvalError::TooFew {
            needed: min,
            got: actual.len(),
        });
    }
    Ok(())
}

/// Coefficient of determination: 1 − SSres/SStot about the actual mean.
pub fn r2_score(actual: &[f64], predicted: &[f64]) -> Result<f64, EvalError> {
    check_lengths(actual, predicted, 2)?;
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_tot: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    if ss_tot <= 0.0 {
        return Err(EvalError::ConstantActual);
    }
    let ss_res: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn mse(actual: &[f64], predicted: &[f64]) -> Result<f64, EvalError> {
    check_lengths(actual, predicted, 1)?;
    Ok(actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).powi(2))
        .sum::<f64>()
        / actual.len() as f64)
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64, EvalError> {
    mse(actual, predicted).map(f64::sqrt)
}

pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64, EvalError> {
    check_lengths(actual, predicted, 1)?;
    Ok(actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).abs())
        .sum::<f64>()
        / actual.len() as f64)
}

/// Timed pipeline phases: training-time components and the online
/// prediction itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    TctPreprocess,
    TctFit,
    Pct,
}

/// Runs `work` and returns its result with the wall-clock seconds spent.
pub fn time_phase<T>(_phase: Phase, work: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = work();
    (out, start.elapsed().as_secs_f64())
}

/// Accuracy and timing of one (AP, metric, model) evaluation.
///
/// `r2/mse/rmse/mae` are on the normalized metric scale the models train
/// on; the `raw_*` fields are the same residual metrics after multiplying
/// back by the stored maximum (R2 is scale-free).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub ap_name: String,
    pub metric: Metric,
    pub mode: PredictionMode,
    pub model_kind: ModelKind,
    pub r2: f64,
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub raw_mse: f64,
    pub raw_rmse: f64,
    pub raw_mae: f64,
    pub tct_seconds: f64,
    pub pct_seconds: f64,
    pub series_pairs: Vec<(NaiveDateTime, f64, f64)>,
}

impl EvalReport {
    /// Builds a report from aligned actual/predicted values (normalized
    /// scale) and the series maximum used for de-normalization.
    #[allow(clippy::too_many_arguments)]
    pub fn from_series(
        ap_name: &str,
        metric: Metric,
        mode: PredictionMode,
        model_kind: ModelKind,
        timestamps: Vec<NaiveDateTime>,
        actual: &[f64],
        predicted: &[f64],
        max_value: f64,
        tct_seconds: f64,
        pct_seconds: f64,
    ) -> Result<EvalReport, EvalError> {
        check_lengths(actual, predicted, 2)?;
        let raw_actual: Vec<f64> = actual.iter().map(|v| v * max_value).collect();
        let raw_predicted: Vec<f64> = predicted.iter().map(|v| v * max_value).collect();
        Ok(EvalReport {
            ap_name: ap_name.to_string(),
            metric,
            mode,
            model_kind,
            r2: r2_score(actual, predicted)?,
            mse: mse(actual, predicted)?,
            rmse: rmse(actual, predicted)?,
            mae: mae(actual, predicted)?,
            raw_mse: mse(&raw_actual, &raw_predicted)?,
            raw_rmse: rmse(&raw_actual, &raw_predicted)?,
            raw_mae: mae(&raw_actual, &raw_predicted)?,
            tct_seconds,
            pct_seconds,
            series_pairs: timestamps
                .into_iter()
                .zip(actual.iter().zip(predicted))
                .map(|(t, (a, p))| (t, *a, *p))
                .collect(),
        })
    }
}

/// Arithmetic mean of every metric across APs (RMSE averaged directly, as
/// per-AP tables are usually summarized, not recomputed from mean MSE).
pub fn aggregate(reports: &[EvalReport]) -> Result<EvalReport, EvalError> {
    let first = reports.first().ok_or(EvalError::EmptyAggregate)?;
    if reports.iter().any(|r| r.model_kind != first.model_kind) {
        return Err(EvalError::MixedAggregate("model kinds"));
    }
    if reports.iter().any(|r| r.metric != first.metric) {
        return Err(EvalError::MixedAggregate("metrics"));
    }
    let n = reports.len() as f64;
    let mean = |f: fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    Ok(EvalReport {
        ap_name: "average".to_string(),
        metric: first.metric,
        mode: first.mode,
        model_kind: first.model_kind,
        r2: mean(|r| r.r2),
        mse: mean(|r| r.mse),
        rmse: mean(|r| r.rmse),
        mae: mean(|r| r.mae),
        raw_mse: mean(|r| r.raw_mse),
        raw_rmse: mean(|r| r.raw_rmse),
        raw_mae: mean(|r| r.raw_mae),
        tct_seconds: mean(|r| r.tct_seconds),
        pct_seconds: mean(|r| r.pct_seconds),
        series_pairs: Vec::new(),
    })
}

pub const SUMMARY_HEADER: &str = "ap,metric,mode,model,r2,mse,rmse,mae,tct_s,pct_s";
pub const SUMMARY_RAW_HEADER: &str = "ap,metric,mode,model,r2,mse_raw,rmse_raw,mae_raw,tct_s,pct_s";

fn summary_row(r: &EvalReport, mode_label: &str, raw: bool) -> String {
    let (a, b, c) = if raw {
        (r.raw_mse, r.raw_rmse, r.raw_mae)
    } else {
        (r.mse, r.rmse, r.mae)
    };
    format!(
        "{},{},{},{},{:.5},{:.5},{:.5},{:.5},{:.3},{:.3}\n",
        r.ap_name, r.metric, mode_label, r.model_kind, r.r2, a, b, c, r.tct_seconds, r.pct_seconds
    )
}

/// Writes `summary.csv` (normalized scale), `summary_raw.csv` and one
/// `series/<ap>__<metric>__<model>.csv` per report under `dir`.
///
/// Rows are sorted and floats formatted with fixed precision, so identical
/// inputs re-emit byte-identical files. Each (metric, model) group gets an
/// `average` aggregate row, labelled `mixed` when its members disagree on
/// the prediction mode.
pub fn emit_report(reports: &[EvalReport], dir: &Path) -> Result<(), EvalError> {
    let io = |path: &Path, source: std::io::Error| EvalError::Io {
        path: path.display().to_string(),
        source,
    };
    fs::create_dir_all(dir.join("series")).map_err(|e| io(dir, e))?;

    let mut ordered: Vec<&EvalReport> = reports.iter().collect();
    ordered.sort_by(|a, b| {
        (a.metric, a.model_kind.slug(), &a.ap_name).cmp(&(b.metric, b.model_kind.slug(), &b.ap_name))
    });

    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    let mut summary_raw = String::from(SUMMARY_RAW_HEADER);
    summary_raw.push('\n');

    let mut idx = 0;
    while idx < ordered.len() {
        let group_start = idx;
        let key = (ordered[idx].metric, ordered[idx].model_kind);
        while idx < ordered.len() && (ordered[idx].metric, ordered[idx].model_kind) == key {
            let r = ordered[idx];
            summary.push_str(&summary_row(r, &r.mode.to_string(), false));
            summary_raw.push_str(&summary_row(r, &r.mode.to_string(), true));
            idx += 1;
        }
        let group: Vec<EvalReport> = ordered[group_start..idx].iter().map(|r| (*r).clone()).collect();
        let agg = aggregate(&group)?;
        let uniform = group.iter().all(|r| r.mode == group[0].mode);
        let mode_label = if uniform {
            group[0].mode.to_string()
        } else {
            "mixed".to_string()
        };
        summary.push_str(&summary_row(&agg, &mode_label, false));
        summary_raw.push_str(&summary_row(&agg, &mode_label, true));
    }

    write_atomic(&dir.join("summary.csv"), summary.as_bytes()).map_err(|e| io(dir, e))?;
    write_atomic(&dir.join("summary_raw.csv"), summary_raw.as_bytes()).map_err(|e| io(dir, e))?;

    for r in reports {
        let mut body = String::from("timestamp,actual,predicted\n");
        for (t, a, p) in &r.series_pairs {
            body.push_str(&format!("{},{:.6},{:.6}\n", t.format("%Y-%m-%dT%H:%M"), a, p));
        }
        let name = format!("{}__{}__{}.csv", r.ap_name, r.metric, r.model_kind);
        let path = dir.join("series").join(name);
        write_atomic(&path, body.as_bytes()).map_err(|e| io(&path, e))?;
    }
    Ok(())
}

/// Write-then-rename so partially written artifacts never appear.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
    }
    fs::rename(tmp, path)
}
