//! End-to-end orchestration: offline training (ingest → preprocess →
//! correlate → train) and online prediction, as resumable stages that
//! exchange files under the output directory.
//!
//! Per-AP work is parallelized and failure-isolated: one AP's bad series
//! is recorded and skipped without aborting the batch.

pub mod artifacts;
pub mod predict;

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, PipelineConfig};
use crate::eval::{self, EvalReport, Phase};
use crate::ingest::{self, IngestError};
use crate::nn::model::AdamSpec;
use crate::nn::{build_model, Tensor};
use crate::preprocess::{
    backfill_and_prune, days_to_prune, derive_failures_raw, derive_traffic_raw, max_over,
    normalize_with_max, resample_to_grid, GriddedSeries, Metric, MetricSeries, PreprocessError,
};
use crate::spatial::{
    assemble_matrix, build_correlation_matrix, select_high_corr, NeighborSet, PredictionMode,
    SpatialError,
};
use crate::statlag::{
    combined_lag, max_feasible_lag, select_lag_with, LagSelection, StatLagError,
};
use crate::synth::{generate_synthetic, SynthError};
use crate::train::{
    fit, make_windows, save_model, walk_forward_plan, TrainedModel, WindowOrigin,
};

use artifacts::{
    io_error, CorrelateManifest, PreprocessManifest, TrainEntry, TrainManifest, TrainStatus,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("[{stage}] i/o error on {path}: {source}")]
    Io {
        stage: &'static str,
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("[{stage}] missing artifact {path}; run the earlier stage first")]
    MissingArtifact { stage: &'static str, path: String },
    #[error("artifact {path} is corrupt: {detail}")]
    Corrupt { path: String, detail: String },
    #[error("artifact encoding error: {0}")]
    Encode(#[source] serde_json::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("[ingest] {0}")]
    Ingest(#[from] IngestError),
    #[error("[synth] {0}")]
    Synth(#[from] SynthError),
    #[error("[preprocess] no usable AP series for {metric}")]
    NoUsableAps { metric: Metric },
    #[error("[correlate] {0}")]
    Spatial(#[from] SpatialError),
    #[error("[train] no model was trained; every (ap, kind) combination failed or was skipped")]
    NothingTrained,
    #[error("[predict] {0}")]
    Predict(String),
    #[error("`synth` requires a [synth] section in the config")]
    NoSynthSection,
}

/// Outcome of a full run: evaluation reports plus per-AP problems that
/// were skipped over.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub reports: Vec<EvalReport>,
    pub skipped: Vec<String>,
}

fn seed_for(base: u64, metric: Metric, ap: &str, kind: &str) -> u64 {
    // FNV-1a so model seeds are stable across platforms and runs
    let mut hash = 0xcbf2_9ce4_8422_2325u64 ^ base;
    for byte in metric
        .slug()
        .bytes()
        .chain([b'/'])
        .chain(ap.bytes())
        .chain([b'/'])
        .chain(kind.bytes())
    {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn train_boundary(len: usize, split: f64) -> usize {
    (((1.0 - split) * len as f64).ceil() as usize).clamp(1, len.saturating_sub(1).max(1))
}

/// Generates the synthetic export configured in `[synth]`, writing the
/// measurement file plus a `*.coupling.csv` ground-truth sidecar.
pub fn stage_synth(config: &PipelineConfig) -> Result<(), PipelineError> {
    let section = config.synth.as_ref().ok_or(PipelineError::NoSynthSection)?;
    let spec = section.to_spec(config.seed)?;
    let output = generate_synthetic(&spec, &config.grid()?)?;
    if let Some(parent) = config.measurements.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| io_error("synth", parent, e))?;
        }
    }
    eval::write_atomic(&config.measurements, output.measurements_csv.as_bytes())
        .map_err(|e| io_error("synth", &config.measurements, e))?;
    let sidecar = config.measurements.with_extension("coupling.csv");
    eval::write_atomic(&sidecar, output.coupling_csv.as_bytes())
        .map_err(|e| io_error("synth", &sidecar, e))?;
    Ok(())
}

struct PreparedAp {
    gridded: GriddedSeries,
    seconds: f64,
}

/// Ingests the export and produces aligned, backfilled, normalized series
/// plus the lag selection, per metric.
pub fn stage_preprocess(config: &PipelineConfig) -> Result<(), PipelineError> {
    let grid = config.grid()?;
    let dataset = ingest::load_raw_dataset(&config.measurements, &config.radio_filter)?;
    if dataset.dropped_duplicates > 0 {
        log::warn!(
            "dropped {} duplicate (ap, timestamp) rows, keeping the last occurrence",
            dataset.dropped_duplicates
        );
    }

    for &metric in &config.metrics {
        let mut failures: BTreeMap<String, String> = BTreeMap::new();

        // per-AP derive + grid (timed)
        let gridded: Vec<(String, Result<PreparedAp, PreprocessError>)> = dataset
            .records
            .par_iter()
            .map(|(ap, records)| {
                let (result, seconds) = eval::time_phase(Phase::TctPreprocess, || {
                    let samples: Vec<_> = records
                        .iter()
                        .map(|r| {
                            let v = match metric {
                                Metric::TrafficLoad => derive_traffic_raw(r),
                                Metric::Failures => derive_failures_raw(r),
                            };
                            (r.timestamp, v)
                        })
                        .collect();
                    resample_to_grid(ap, metric, &samples, &grid)
                });
                let seconds = if config.record_timings { seconds } else { 0.0 };
                (ap.clone(), result.map(|gridded| PreparedAp { gridded, seconds }))
            })
            .collect();

        let mut prepared: BTreeMap<String, PreparedAp> = BTreeMap::new();
        for (ap, result) in gridded {
            match result {
                Ok(p) => {
                    prepared.insert(ap, p);
                }
                Err(e) => {
                    failures.insert(ap, e.to_string());
                }
            }
        }

        // align every AP on the days all of them retain
        let mut pruned_days: BTreeMap<String, Vec<NaiveDate>> = BTreeMap::new();
        let mut common: Option<Vec<NaiveDate>> = None;
        for (ap, p) in &prepared {
            let pruned = days_to_prune(&p.gridded, config.missing_run_limit);
            let kept: Vec<NaiveDate> = p
                .gridded
                .days
                .iter()
                .copied()
                .filter(|d| !pruned.contains(d))
                .collect();
            pruned_days.insert(ap.clone(), pruned);
            common = Some(match common {
                None => kept,
                Some(prev) => prev.into_iter().filter(|d| kept.contains(d)).collect(),
            });
        }
        let common = common.unwrap_or_default();
        if common.is_empty() || prepared.is_empty() {
            return Err(PipelineError::NoUsableAps { metric });
        }

        let n = common.len() * grid.periods_per_day();
        let train_end = train_boundary(n, config.split);

        // backfill + normalize + lag selection (timed per AP)
        struct Finished {
            series: MetricSeries,
            record: crate::preprocess::NormalizationRecord,
            lag: usize,
            seconds: f64,
        }
        let eff_max_lag = config.max_lag.min(max_feasible_lag(train_end));
        let finished: Vec<(String, Result<Finished, String>)> = prepared
            .par_iter()
            .map(|(ap, p)| {
                let run = || -> Result<(MetricSeries, usize, f64), String> {
                    let restricted = p.gridded.restrict_to_days(&common);
                    let (dense, _) = backfill_and_prune(&restricted, config.missing_run_limit)
                        .map_err(|e| e.to_string())?;
                    if eff_max_lag == 0 {
                        return Err(format!(
                            "series too short for any lag (train range {train_end})"
                        ));
                    }
                    let lag = select_lag_with(&dense.values, eff_max_lag, config.lag_criterion)
                        .map_err(|e: StatLagError| e.to_string())?;
                    let max = max_over(&dense, 0..train_end).map_err(|e| e.to_string())?;
                    Ok((dense, lag, max))
                };
                let (result, seconds) = eval::time_phase(Phase::TctPreprocess, run);
                let seconds = if config.record_timings {
                    p.seconds + seconds
                } else {
                    0.0
                };
                (
                    ap.clone(),
                    result.map(|(series, lag, max)| Finished {
                        series,
                        record: crate::preprocess::NormalizationRecord {
                            ap_name: ap.clone(),
                            metric,
                            max_value: max,
                            computed_over: (0, train_end),
                        },
                        lag,
                        seconds,
                    }),
                )
            })
            .collect();

        let mut dense: BTreeMap<String, Finished> = BTreeMap::new();
        for (ap, result) in finished {
            match result {
                Ok(f) => {
                    dense.insert(ap, f);
                }
                Err(reason) => {
                    failures.insert(ap, reason);
                }
            }
        }
        if dense.is_empty() {
            return Err(PipelineError::NoUsableAps { metric });
        }

        // optionally share one maximum across every AP
        let global_max = dense
            .values()
            .map(|f| f.record.max_value)
            .fold(f64::NEG_INFINITY, f64::max);

        let mut series_out: BTreeMap<String, MetricSeries> = BTreeMap::new();
        let mut normalization = BTreeMap::new();
        let mut per_ap_lags = BTreeMap::new();
        let mut tct = BTreeMap::new();
        for (ap, f) in dense {
            let max_value = if config.global_normalization {
                global_max
            } else {
                f.record.max_value
            };
            let (normalized, record) =
                normalize_with_max(&f.series, 0..train_end, max_value).map_err(|e| {
                    PipelineError::Corrupt {
                        path: format!("{ap}/{metric}"),
                        detail: e.to_string(),
                    }
                })?;
            series_out.insert(ap.clone(), normalized);
            normalization.insert(ap.clone(), record);
            per_ap_lags.insert(ap.clone(), f.lag);
            tct.insert(ap.clone(), f.seconds);
        }

        let lags = LagSelection::from_per_ap(per_ap_lags).map_err(|e| PipelineError::Corrupt {
            path: format!("{metric} lag selection"),
            detail: e.to_string(),
        })?;

        for (ap, reason) in &failures {
            log::warn!("[preprocess/{metric}] skipping {ap}: {reason}");
        }

        let manifest = PreprocessManifest {
            metric,
            period_minutes: grid.period_minutes,
            day_start_minute: grid.day_start_minute,
            day_end_minute: grid.day_end_minute,
            periods_per_day: grid.periods_per_day(),
            days: common,
            train_end,
            aps: series_out.keys().cloned().collect(),
            normalization,
            pruned_days,
            lags,
            max_lag_used: eff_max_lag,
            tct_preprocess: tct,
            failures,
        };
        artifacts::write_preprocess(&config.out_dir, &manifest, &series_out)?;
    }
    Ok(())
}

/// Correlates every candidate pair and fixes each AP's neighbour set and
/// prediction mode.
pub fn stage_correlate(config: &PipelineConfig) -> Result<(), PipelineError> {
    for &metric in &config.metrics {
        let (manifest, series) = artifacts::read_preprocess(&config.out_dir, metric)?;
        let candidates = ingest::load_neighbor_candidates_named(
            config.neighbors.as_deref(),
            &manifest.aps,
        )?;
        for warning in &candidates.warnings {
            log::warn!("[correlate/{metric}] {warning}");
        }

        let corr_series: BTreeMap<String, MetricSeries> = if config.corr_on_train_range {
            series
                .iter()
                .map(|(ap, s)| {
                    let mut t = s.clone();
                    t.values.truncate(manifest.train_end);
                    t.was_missing.truncate(manifest.train_end);
                    (ap.clone(), t)
                })
                .collect()
        } else {
            series.clone()
        };
        let matrix = build_correlation_matrix(&corr_series, &candidates)?;
        for warning in &matrix.warnings {
            log::warn!("[correlate/{metric}] {warning}");
        }

        let mut neighbors = BTreeMap::new();
        let mut modes = BTreeMap::new();
        for ap in &manifest.aps {
            let set = select_high_corr(&matrix, ap, config.threshold, config.m_max)?;
            let mode = if config.force_temporal {
                PredictionMode::Temporal
            } else {
                set.mode()
            };
            neighbors.insert(ap.clone(), set.neighbors);
            modes.insert(ap.clone(), mode);
        }

        artifacts::write_correlate(
            &config.out_dir,
            &CorrelateManifest {
                metric,
                threshold: config.threshold,
                m_max: config.m_max,
                neighbors,
                modes,
                warnings: matrix.warnings.clone(),
            },
            &matrix.to_csv(),
        )?;
    }
    Ok(())
}

/// Fits the configured model kinds per AP over the walk-forward plan and
/// persists models plus validation predictions.
///
/// `ap_filter` limits training to the named APs (the incremental-AP
/// workflow); `None` trains everything.
pub fn stage_train(
    config: &PipelineConfig,
    ap_filter: Option<&[String]>,
) -> Result<(), PipelineError> {
    for &metric in &config.metrics {
        let (pman, series) = artifacts::read_preprocess(&config.out_dir, metric)?;
        let cman = artifacts::read_correlate(&config.out_dir, metric)?;

        let aps: Vec<String> = pman
            .aps
            .iter()
            .filter(|ap| ap_filter.map(|f| f.contains(ap)).unwrap_or(true))
            .cloned()
            .collect();
        let jobs: Vec<(String, crate::nn::ModelKind)> = aps
            .iter()
            .flat_map(|ap| config.model_kinds.iter().map(move |k| (ap.clone(), *k)))
            .collect();

        let results: Vec<(String, String, TrainEntry)> = jobs
            .par_iter()
            .map(|(ap, kind)| {
                let entry = train_one(config, metric, &pman, &cman, &series, ap, *kind);
                (ap.clone(), kind.slug().to_string(), entry)
            })
            .collect();

        // an AP-filtered (incremental) run extends the existing manifest so
        // earlier models stay visible to `evaluate`
        let mut entries: BTreeMap<String, BTreeMap<String, TrainEntry>> = if ap_filter.is_some() {
            artifacts::read_train(&config.out_dir, metric)
                .map(|m| m.entries)
                .unwrap_or_default()
        } else {
            BTreeMap::new()
        };
        let mut ok = 0usize;
        for (ap, kind, entry) in results {
            if entry.status == TrainStatus::Ok {
                ok += 1;
            } else if let Some(reason) = &entry.reason {
                log::warn!("[train/{metric}] {ap}/{kind}: {reason}");
            }
            entries.entry(ap).or_default().insert(kind, entry);
        }
        if ok == 0 {
            return Err(PipelineError::NothingTrained);
        }
        artifacts::write_train(&config.out_dir, &TrainManifest { metric, entries })?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn train_one(
    config: &PipelineConfig,
    metric: Metric,
    pman: &PreprocessManifest,
    cman: &CorrelateManifest,
    series: &BTreeMap<String, MetricSeries>,
    ap: &str,
    kind: crate::nn::ModelKind,
) -> TrainEntry {
    let mode = cman
        .modes
        .get(ap)
        .copied()
        .unwrap_or(PredictionMode::Temporal);
    let selected = cman.neighbors.get(ap).cloned().unwrap_or_default();
    let tct_preprocess = pman.tct_preprocess.get(ap).copied().unwrap_or(0.0);

    let fail = |mode: PredictionMode, lag: usize, reason: String| TrainEntry {
        status: TrainStatus::Failed,
        reason: Some(reason),
        mode,
        lag,
        input_len: 0,
        tct_preprocess_seconds: tct_preprocess,
        tct_fit_seconds: 0.0,
        pct_seconds: 0.0,
    };

    if kind.is_hybrid() && mode == PredictionMode::Temporal {
        return TrainEntry {
            status: TrainStatus::Skipped,
            reason: Some("hybrid models need the spatio-temporal mode".to_string()),
            mode,
            lag: 0,
            input_len: 0,
            tct_preprocess_seconds: tct_preprocess,
            tct_fit_seconds: 0.0,
            pct_seconds: 0.0,
        };
    }

    let neighbor_set = NeighborSet {
        target: ap.to_string(),
        m_count: selected.len(),
        neighbors: selected,
        threshold: cman.threshold,
        m_max: cman.m_max,
    };
    let truncated = neighbor_set.truncated().to_vec();

    // temporal models share the consensus lag; spatio-temporal inputs use
    // the maximum lag over their columns
    let lag = match mode {
        PredictionMode::Temporal => pman.lags.consensus,
        PredictionMode::SpatioTemporal => {
            let mut column_lags: Vec<usize> = vec![pman.lags.consensus];
            if let Some(own) = pman.lags.per_ap.get(ap) {
                column_lags[0] = *own;
            }
            for (other, _) in &truncated {
                if let Some(l) = pman.lags.per_ap.get(other) {
                    column_lags.push(*l);
                }
            }
            match combined_lag(&column_lags) {
                Ok(l) => l,
                Err(e) => return fail(mode, 0, e.to_string()),
            }
        }
    };
    let input_len = lag + usize::from(config.inclusive_windows);

    let target = &series[ap];
    let matrix = match mode {
        PredictionMode::Temporal => {
            Tensor::from_vec(&[target.len(), 1], target.values.clone()).expect("column shape")
        }
        PredictionMode::SpatioTemporal => {
            match assemble_matrix(target, &neighbor_set, series, cman.m_max) {
                Ok((values, cols)) => {
                    Tensor::from_vec(&[target.len(), cols], values).expect("matrix shape")
                }
                Err(e) => return fail(mode, lag, e.to_string()),
            }
        }
    };

    let origin = WindowOrigin {
        ap_name: ap.to_string(),
        metric,
        mode,
    };
    let windows = match make_windows(&matrix, input_len, origin) {
        Ok(w) => w,
        Err(e) => return fail(mode, lag, e.to_string()),
    };
    let plan = match walk_forward_plan(windows.count(), config.split, config.refit_stride) {
        Ok(p) => p,
        Err(e) => return fail(mode, lag, e.to_string()),
    };

    let seed = seed_for(config.seed, metric, ap, kind.slug());
    let spec = match build_model(
        kind,
        mode,
        input_len,
        cman.m_max,
        seed,
        AdamSpec::with_learning_rate(config.train.learning_rate),
    ) {
        Ok(s) => s,
        Err(e) => return fail(mode, lag, e.to_string()),
    };

    let train_config = crate::train::TrainConfig {
        seed,
        ..config.train.clone()
    };
    let (model, report) = match fit(&spec, &windows, &plan, &train_config) {
        Ok(x) => x,
        Err(e) => return fail(mode, lag, e.to_string()),
    };

    // one online prediction, timed, on the newest window
    let last_window = windows.window(windows.count() - 1);
    let (pct_result, pct_seconds) = eval::time_phase(Phase::Pct, || model.predict(&last_window));
    if let Err(e) = pct_result {
        return fail(mode, lag, e.to_string());
    }

    let mut normalization = Vec::with_capacity(1 + truncated.len());
    match pman.normalization.get(ap) {
        Some(record) => normalization.push(record.clone()),
        None => return fail(mode, lag, format!("no normalization record for {ap}")),
    }
    for (other, _) in &truncated {
        match pman.normalization.get(other) {
            Some(record) => normalization.push(record.clone()),
            None => return fail(mode, lag, format!("no normalization record for {other}")),
        }
    }

    let trained = TrainedModel {
        model,
        kind,
        target_ap: ap.to_string(),
        metric,
        mode,
        lag: input_len,
        neighbors: truncated,
        normalization,
    };
    let model_path = artifacts::model_file(&config.out_dir, metric, ap, kind.slug());
    if let Err(e) = save_model(&trained, &model_path) {
        return fail(mode, lag, e.to_string());
    }

    let rows: Vec<(usize, chrono::NaiveDateTime, f64, f64)> = report
        .validation
        .iter()
        .map(|v| {
            (
                v.window_index,
                target.timestamp(v.window_index + input_len),
                v.actual,
                v.predicted,
            )
        })
        .collect();
    let pred_path = artifacts::predictions_file(&config.out_dir, metric, ap, kind.slug());
    if let Err(e) = artifacts::write_predictions(&pred_path, &rows) {
        return fail(mode, lag, e.to_string());
    }

    TrainEntry {
        status: TrainStatus::Ok,
        reason: None,
        mode,
        lag,
        input_len,
        tct_preprocess_seconds: tct_preprocess,
        tct_fit_seconds: if config.record_timings {
            report.tct_fit_seconds
        } else {
            0.0
        },
        pct_seconds: if config.record_timings { pct_seconds } else { 0.0 },
    }
}

/// Turns stored validation predictions into evaluation reports and emits
/// the summary and series files.
pub fn stage_evaluate(config: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    let mut all_reports = Vec::new();
    let mut skipped = Vec::new();
    for &metric in &config.metrics {
        let (pman, _) = artifacts::read_preprocess(&config.out_dir, metric)?;
        let tman = artifacts::read_train(&config.out_dir, metric)?;
        let mut reports = Vec::new();
        for (ap, kinds) in &tman.entries {
            for (kind_slug, entry) in kinds {
                if entry.status != TrainStatus::Ok {
                    skipped.push(format!(
                        "{metric}/{ap}/{kind_slug}: {}",
                        entry.reason.as_deref().unwrap_or("skipped")
                    ));
                    continue;
                }
                let kind: crate::nn::ModelKind = kind_slug
                    .parse()
                    .map_err(|detail: String| PipelineError::Corrupt {
                        path: "train manifest".to_string(),
                        detail,
                    })?;
                let rows = artifacts::read_predictions(&artifacts::predictions_file(
                    &config.out_dir,
                    metric,
                    ap,
                    kind_slug,
                ))?;
                let timestamps: Vec<chrono::NaiveDateTime> =
                    rows.iter().map(|r| r.1).collect();
                let actual: Vec<f64> = rows.iter().map(|r| r.2).collect();
                let predicted: Vec<f64> = rows.iter().map(|r| r.3).collect();
                let max_value = pman
                    .normalization
                    .get(ap)
                    .map(|r| r.max_value)
                    .unwrap_or(1.0);
                match EvalReport::from_series(
                    ap,
                    metric,
                    entry.mode,
                    kind,
                    timestamps,
                    &actual,
                    &predicted,
                    max_value,
                    entry.tct_preprocess_seconds + entry.tct_fit_seconds,
                    entry.pct_seconds,
                ) {
                    Ok(report) => reports.push(report),
                    Err(e) => skipped.push(format!("{metric}/{ap}/{kind_slug}: {e}")),
                }
            }
        }
        eval::emit_report(&reports, &artifacts::evaluate_dir(&config.out_dir, metric)).map_err(
            |e| PipelineError::Corrupt {
                path: format!("evaluate/{metric}"),
                detail: e.to_string(),
            },
        )?;
        all_reports.extend(reports);
    }
    Ok(RunSummary {
        reports: all_reports,
        skipped,
    })
}

/// The full offline pass: preprocess → correlate → train → evaluate.
/// Composing the stages on disk keeps `run` artifact-identical to running
/// them one by one.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    stage_preprocess(config)?;
    stage_correlate(config)?;
    stage_train(config, None)?;
    stage_evaluate(config)
}

pub use predict::{predict_once, Prediction};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_per_ap_and_kind() {
        let a = seed_for(1, Metric::TrafficLoad, "AP001", "lstm");
        let b = seed_for(1, Metric::TrafficLoad, "AP002", "lstm");
        let c = seed_for(1, Metric::TrafficLoad, "AP001", "gru");
        let d = seed_for(1, Metric::Failures, "AP001", "lstm");
        let again = seed_for(1, Metric::TrafficLoad, "AP001", "lstm");
        assert_eq!(a, again);
        assert!(a != b && a != c && a != d);
    }

    #[test]
    fn boundary_is_seventy_percent_ceiling() {
        assert_eq!(train_boundary(10, 0.3), 7);
        assert_eq!(train_boundary(2550, 0.3), 1785);
    }
}
