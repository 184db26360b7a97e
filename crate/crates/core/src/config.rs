//! Pipeline configuration: a TOML key-value file mirroring the struct
//! fields, with defaults matching the reference deployment (30-minute
//! periods, 34 slots from 05:30, threshold 0.50, at most 5 neighbours).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::ModelKind;
use crate::preprocess::{GridConfig, Metric};
use crate::statlag::LagCriterion;
use crate::synth::SyntheticSpec;
use crate::train::TrainConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub period_minutes: u32,
    pub periods_per_day: usize,
    /// Daily window start, "HH:MM".
    pub day_start: String,
    /// Daily window end (start of the last slot), "HH:MM".
    pub day_end: String,
    pub radio_filter: String,
    /// Correlation threshold Ths above which a neighbour counts as highly
    /// correlated.
    pub threshold: f64,
    /// Maximum neighbours per spatio-temporal input (M).
    pub m_max: usize,
    pub max_lag: usize,
    /// Longest missing run that is still backfilled; longer runs drop the
    /// day.
    pub missing_run_limit: usize,
    /// Validation fraction of the walk-forward split.
    pub split: f64,
    /// Steps between from-scratch refits during validation.
    pub refit_stride: usize,
    pub model_kinds: Vec<ModelKind>,
    pub metrics: Vec<Metric>,
    pub seed: u64,
    /// Ignore neighbour analysis and train every AP temporally.
    pub force_temporal: bool,
    /// Windows carry L+1 inputs instead of L (the tuple-set reading).
    pub inclusive_windows: bool,
    /// Compute correlations over the training range only instead of the
    /// whole series.
    pub corr_on_train_range: bool,
    /// Normalize by the maximum across all APs instead of per AP.
    pub global_normalization: bool,
    pub lag_criterion: LagCriterion,
    /// Record wall-clock TCT/PCT; disable for byte-reproducible reports.
    pub record_timings: bool,
    pub train: TrainConfig,
    /// Measurement export consumed by `preprocess`/`run` (and written by
    /// `synth`).
    pub measurements: PathBuf,
    /// Optional neighbour candidate file; all pairs when absent.
    pub neighbors: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub synth: Option<SyntheticSpecConfig>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            period_minutes: 30,
            periods_per_day: 34,
            day_start: "05:30".to_string(),
            day_end: "22:00".to_string(),
            radio_filter: "2.4GHz".to_string(),
            threshold: 0.50,
            m_max: 5,
            max_lag: 34,
            missing_run_limit: 2,
            split: 0.3,
            refit_stride: 34,
            model_kinds: vec![ModelKind::Lstm],
            metrics: vec![Metric::TrafficLoad, Metric::Failures],
            seed: 42,
            force_temporal: false,
            inclusive_windows: false,
            corr_on_train_range: false,
            global_normalization: false,
            lag_criterion: LagCriterion::Statistic,
            record_timings: true,
            train: TrainConfig::default(),
            measurements: PathBuf::from("measurements.csv"),
            neighbors: None,
            out_dir: PathBuf::from("out"),
            synth: None,
        }
    }
}

/// `[synth]` section: the generator spec minus the full coupling matrix
/// (a uniform strength is what config files need; custom matrices go
/// through the library API).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpecConfig {
    pub ap_count: usize,
    pub day_count: usize,
    pub start_date: String,
    pub coupling: f64,
    pub amplitude: f64,
    pub noise_std: f64,
    pub missing_prob: f64,
    pub failure_base: f64,
    pub seed: Option<u64>,
}

impl Default for SyntheticSpecConfig {
    fn default() -> Self {
        let template = SyntheticSpec::uniform(6, 75, 0.7, 0);
        SyntheticSpecConfig {
            ap_count: 6,
            day_count: 75,
            start_date: "2019-09-09".to_string(),
            coupling: 0.7,
            amplitude: template.amplitude,
            noise_std: template.noise_std,
            missing_prob: template.missing_prob,
            failure_base: template.failure_base,
            seed: None,
        }
    }
}

impl SyntheticSpecConfig {
    /// Expands the config section into a full generator spec; without its
    /// own seed it inherits the pipeline seed.
    pub fn to_spec(&self, pipeline_seed: u64) -> Result<SyntheticSpec, ConfigError> {
        let start_date = chrono::NaiveDate::parse_from_str(&self.start_date, "%Y-%m-%d")
            .map_err(|e| ConfigError::Invalid(format!("synth.start_date: {e}")))?;
        let mut spec = SyntheticSpec::uniform(
            self.ap_count,
            self.day_count,
            self.coupling,
            self.seed.unwrap_or(pipeline_seed),
        );
        spec.start_date = start_date;
        spec.amplitude = self.amplitude;
        spec.noise_std = self.noise_std;
        spec.missing_prob = self.missing_prob;
        spec.failure_base = self.failure_base;
        Ok(spec)
    }
}

fn parse_hhmm(text: &str, field: &str) -> Result<u32, ConfigError> {
    let (h, m) = text
        .split_once(':')
        .ok_or_else(|| ConfigError::Invalid(format!("{field} must be HH:MM, got `{text}`")))?;
    let hours: u32 = h
        .parse()
        .map_err(|_| ConfigError::Invalid(format!("{field}: bad hour in `{text}`")))?;
    let minutes: u32 = m
        .parse()
        .map_err(|_| ConfigError::Invalid(format!("{field}: bad minute in `{text}`")))?;
    if hours >= 24 || minutes >= 60 {
        return Err(ConfigError::Invalid(format!("{field}: `{text}` out of range")));
    }
    Ok(hours * 60 + minutes)
}

impl PipelineConfig {
    pub fn from_toml_file(path: &Path) -> Result<PipelineConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: PipelineConfig =
            toml::from_str(&text).map_err(|source| ConfigError::Parse {
                path: path.display().to_string(),
                source,
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn grid(&self) -> Result<GridConfig, ConfigError> {
        let grid = GridConfig {
            period_minutes: self.period_minutes,
            day_start_minute: parse_hhmm(&self.day_start, "day_start")?,
            day_end_minute: parse_hhmm(&self.day_end, "day_end")?,
        };
        grid.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let grid = self.grid()?;
        if grid.periods_per_day() != self.periods_per_day {
            return Err(ConfigError::Invalid(format!(
                "day window {}..{} at {} minutes gives {} periods per day, config says {}",
                self.day_start,
                self.day_end,
                self.period_minutes,
                grid.periods_per_day(),
                self.periods_per_day
            )));
        }
        if !(-1.0..1.0).contains(&self.threshold) {
            return Err(ConfigError::Invalid(format!(
                "threshold {} outside (-1, 1)",
                self.threshold
            )));
        }
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "split {} outside (0, 1)",
                self.split
            )));
        }
        if self.max_lag == 0 || self.refit_stride == 0 {
            return Err(ConfigError::Invalid(
                "max_lag and refit_stride must be positive".into(),
            ));
        }
        if self.model_kinds.is_empty() || self.metrics.is_empty() {
            return Err(ConfigError::Invalid(
                "model_kinds and metrics must be non-empty".into(),
            ));
        }
        self.train
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }
}
