//! Window construction, walk-forward planning, model fitting, exhaustive
//! hyperparameter search and model persistence.

pub mod fit;
pub mod grid;
pub mod persist;
pub mod plan;
pub mod windows;

use thiserror::Error;

pub use fit::{fit, TrainConfig, TrainReport, ValidationPoint};
pub use grid::{grid_search, ComboScore, GridOutcome, HyperCombo, HyperGrid};
pub use persist::{load_model, save_model, TrainedModel, MODEL_FORMAT_VERSION};
pub use plan::{walk_forward_plan, FoldPlan, PlanStep};
pub use windows::{make_windows, WindowOrigin, WindowSet};

use crate::nn::NnError;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("series of {len} rows cannot supply windows of {input_len} inputs")]
    InsufficientData { len: usize, input_len: usize },
    #[error("window source must be a rank-2 matrix, got shape {shape:?}")]
    BadMatrix { shape: Vec<usize> },
    #[error("{window_count} windows are too few to plan validation (need {needed})")]
    PlanTooSmall { window_count: usize, needed: usize },
    #[error("validation split {split} must lie in (0, 1)")]
    BadSplit { split: f64 },
    #[error("refit stride must be positive")]
    BadRefitStride,
    #[error("invalid train config: {0}")]
    BadTrainConfig(String),
    #[error("plan covers {plan_windows} windows but the set has {actual}")]
    PlanWindowMismatch { plan_windows: usize, actual: usize },
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Divergence { epoch: usize, loss: f64 },
    #[error("hyperparameter grid has no feasible combination")]
    EmptyGrid,
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model manifest error: {0}")]
    Manifest(#[source] serde_json::Error),
    #[error("model format version {found} unsupported (expected {supported})")]
    VersionMismatch { found: u32, supported: u32 },
    #[error("model file corrupted: {0}")]
    Corrupted(String),
}
