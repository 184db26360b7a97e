//! Exhaustive hyperparameter search scored by mean validation MSE across
//! plan steps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit, TrainConfig};
use super::plan::FoldPlan;
use super::windows::WindowSet;
use super::TrainError;
use crate::nn::model::AdamSpec;
use crate::nn::{build_model_custom, ModelKind};
use crate::spatial::PredictionMode;

/// Candidate axes. `units` is the kernel count for CNNs and the cell count
/// for recurrent stacks; `depths` is the layer/block count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperGrid {
    pub units: Vec<usize>,
    pub depths: Vec<usize>,
    pub batch_sizes: Vec<usize>,
    pub epochs: Vec<usize>,
}

impl HyperGrid {
    /// Kernel-count × layer-count grid explored for the CNN.
    pub fn cnn_paper() -> HyperGrid {
        HyperGrid {
            units: vec![16, 32, 64, 128, 256],
            depths: vec![1, 2, 3],
            batch_sizes: vec![16],
            epochs: vec![100],
        }
    }

    /// Cell-count × layer-count grid explored for the recurrent models.
    pub fn rnn_paper() -> HyperGrid {
        HyperGrid {
            units: vec![32, 50, 64, 100, 128, 256],
            depths: vec![1, 2, 3],
            batch_sizes: vec![16],
            epochs: vec![100],
        }
    }

    /// Batch-size × epoch grid explored for the hybrid models.
    pub fn hybrid_paper() -> HyperGrid {
        HyperGrid {
            units: vec![50],
            depths: vec![2],
            batch_sizes: vec![16, 32],
            epochs: vec![50, 100],
        }
    }

    pub fn combos(&self) -> Vec<HyperCombo> {
        let mut out = Vec::new();
        for &units in &self.units {
            for &depth in &self.depths {
                for &batch_size in &self.batch_sizes {
                    for &epochs in &self.epochs {
                        out.push(HyperCombo {
                            units,
                            depth,
                            batch_size,
                            epochs,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperCombo {
    pub units: usize,
    pub depth: usize,
    pub batch_size: usize,
    pub epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComboScore {
    pub combo: HyperCombo,
    /// Mean validation MSE; `None` when the combination cannot be built at
    /// this input size.
    pub score: Option<f64>,
    pub param_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    pub scores: Vec<ComboScore>,
    pub best: HyperCombo,
    pub best_score: f64,
}

/// Evaluates every combination with a full walk-forward fit and returns
/// the argmin by mean validation MSE. Ties go to the smaller model (fewer
/// parameters), then to grid order.
#[allow(clippy::too_many_arguments)]
pub fn grid_search(
    kind: ModelKind,
    mode: PredictionMode,
    lag: usize,
    m_max: usize,
    grid: &HyperGrid,
    windows: &WindowSet,
    plan: &FoldPlan,
    base: &TrainConfig,
) -> Result<GridOutcome, TrainError> {
    let combos = grid.combos();
    if combos.is_empty() {
        return Err(TrainError::EmptyGrid);
    }
    let scores: Vec<ComboScore> = combos
        .par_iter()
        .map(|combo| {
            let spec = match build_model_custom(
                kind,
                mode,
                lag,
                m_max,
                combo.units,
                combo.depth,
                base.seed,
                AdamSpec::with_learning_rate(base.learning_rate),
            ) {
                Ok(spec) => spec,
                Err(_) => {
                    return Ok(ComboScore {
                        combo: *combo,
                        score: None,
                        param_count: None,
                    })
                }
            };
            let config = TrainConfig {
                batch_size: combo.batch_size,
                epochs: combo.epochs,
                ..base.clone()
            };
            let (_, report) = fit(&spec, windows, plan, &config)?;
            let mse = report
                .validation
                .iter()
                .map(|v| (v.predicted - v.actual).powi(2))
                .sum::<f64>()
                / report.validation.len() as f64;
            Ok(ComboScore {
                combo: *combo,
                score: Some(mse),
                param_count: spec.param_count().ok(),
            })
        })
        .collect::<Result<_, TrainError>>()?;

    let best = scores
        .iter()
        .filter(|s| s.score.is_some())
        .min_by(|a, b| {
            let (sa, sb) = (a.score.unwrap(), b.score.unwrap());
            sa.partial_cmp(&sb)
                .unwrap()
                .then_with(|| a.param_count.cmp(&b.param_count))
        })
        .ok_or(TrainError::EmptyGrid)?;

    Ok(GridOutcome {
        best: best.combo,
        best_score: best.score.unwrap(),
        scores,
    })
}
