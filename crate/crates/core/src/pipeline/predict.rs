//! Online prediction from a persisted model and a window file.
//!
//! The window file is comma-separated: a header of AP names and one row
//! per period of raw (pre-normalization) metric values, oldest first. It
//! must cover the model's target AP and, for spatio-temporal models, every
//! stored neighbour; the last L rows feed the prediction.

use std::path::Path;

use crate::eval::{time_phase, Phase};
use crate::nn::Tensor;
use crate::train::{load_model, TrainedModel};

use super::artifacts::io_error;
use super::PipelineError;

#[derive(Debug, Clone)]
pub struct Prediction {
    /// De-normalized (raw metric scale) predicted next value.
    pub value: f64,
    /// Prediction on the model's normalized scale.
    pub normalized: f64,
    /// Seconds spent in the prediction call itself (model load excluded).
    pub pct_seconds: f64,
    pub target_ap: String,
}

struct WindowFile {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn parse_window_file(path: &Path) -> Result<WindowFile, PipelineError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| io_error("predict", path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| PipelineError::Predict("window file is empty".to_string()))?;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        let row = row.map_err(|_| {
            PipelineError::Predict(format!("window file line {}: non-numeric value", i + 2))
        })?;
        if row.len() != columns.len() {
            return Err(PipelineError::Predict(format!(
                "window file line {}: {} values for {} columns",
                i + 2,
                row.len(),
                columns.len()
            )));
        }
        rows.push(row);
    }
    Ok(WindowFile { columns, rows })
}

fn column_values(
    file: &WindowFile,
    ap: &str,
    take_last: usize,
) -> Result<Vec<f64>, PipelineError> {
    let idx = file
        .columns
        .iter()
        .position(|c| c == ap)
        .ok_or_else(|| PipelineError::Predict(format!("window file lacks a column for AP `{ap}`")))?;
    let start = file.rows.len() - take_last;
    Ok(file.rows[start..].iter().map(|r| r[idx]).collect())
}

/// Applies a stored model to a window file: normalizes each column with
/// the model's stored records, assembles the padded input, predicts and
/// de-normalizes. Only the predict call is timed.
pub fn predict_once(model_path: &Path, window_path: &Path) -> Result<Prediction, PipelineError> {
    let trained = load_model(model_path).map_err(|e| PipelineError::Predict(e.to_string()))?;
    predict_with(&trained, window_path)
}

pub fn predict_with(
    trained: &TrainedModel,
    window_path: &Path,
) -> Result<Prediction, PipelineError> {
    let file = parse_window_file(window_path)?;
    let (input_len, features) = trained.model.spec().input_shape;
    if file.rows.len() < input_len {
        return Err(PipelineError::Predict(format!(
            "window provides {} periods, model needs the last {input_len}",
            file.rows.len()
        )));
    }

    let record_for = |ap: &str| {
        trained
            .normalization
            .iter()
            .find(|r| r.ap_name == ap)
            .ok_or_else(|| {
                PipelineError::Predict(format!("model carries no normalization record for `{ap}`"))
            })
    };

    let mut input = Tensor::zeros(&[input_len, features]);
    let target_record = record_for(&trained.target_ap)?;
    let target = column_values(&file, &trained.target_ap, input_len)?;
    for (r, v) in target.iter().enumerate() {
        input.data_mut()[r * features] = v / target_record.max_value;
    }
    for (k, (neighbor, _)) in trained.neighbors.iter().enumerate() {
        let record = record_for(neighbor)?;
        let values = column_values(&file, neighbor, input_len)?;
        for (r, v) in values.iter().enumerate() {
            input.data_mut()[r * features + k + 1] = v / record.max_value;
        }
    }

    let (result, pct_seconds) = time_phase(Phase::Pct, || trained.model.predict(&input));
    let normalized = result.map_err(|e| PipelineError::Predict(e.to_string()))?;
    Ok(Prediction {
        value: normalized * target_record.max_value,
        normalized,
        pct_seconds,
        target_ap: trained.target_ap.clone(),
    })
}
