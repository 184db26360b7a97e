//! Walk-forward (expanding window) validation plans.

use serde::{Deserialize, Serialize};

use super::TrainError;

/// One validation step: train on windows [0, train_end), predict window
/// `validation_index`, refitting from scratch when `refit` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub train_end: usize,
    pub validation_index: usize,
    pub refit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub split_fraction: f64,
    /// First validation window index.
    pub boundary: usize,
    pub refit_stride: usize,
    pub steps: Vec<PlanStep>,
}

impl FoldPlan {
    pub fn validation_count(&self) -> usize {
        self.steps.len()
    }
}

/// Plans expanding-window validation over `window_count` windows with the
/// last `split` fraction validated one point at a time. A model is refit
/// from scratch every `refit_stride` steps; in between, the last fitted
/// model predicts and newer windows simply join the next refit's data.
pub fn walk_forward_plan(
    window_count: usize,
    split: f64,
    refit_stride: usize,
) -> Result<FoldPlan, TrainError> {
    if window_count < 4 {
        return Err(TrainError::PlanTooSmall {
            window_count,
            needed: 4,
        });
    }
    if !(split > 0.0 && split < 1.0) {
        return Err(TrainError::BadSplit { split });
    }
    if refit_stride == 0 {
        return Err(TrainError::BadRefitStride);
    }
    let boundary = (((1.0 - split) * window_count as f64).ceil() as usize)
        .clamp(1, window_count - 1);
    let steps = (boundary..window_count)
        .map(|v| PlanStep {
            train_end: v,
            validation_index: v,
            refit: (v - boundary) % refit_stride == 0,
        })
        .collect();
    Ok(FoldPlan {
        split_fraction: split,
        boundary,
        refit_stride,
        steps,
    })
}
