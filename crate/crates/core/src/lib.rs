//! Forecasting of Wi-Fi access-point metrics (traffic load, transmission
//! failures) from controller counter exports.
//!
//! The pipeline mirrors how these predictions are produced operationally:
//! counters are ingested per AP, derived metrics are placed on a fixed
//! intra-day grid, gaps are backfilled, series are normalized, an input lag
//! is selected with an augmented Dickey-Fuller scan, and Pearson correlation
//! against candidate neighbours decides between a purely temporal model and
//! a spatio-temporal one that also sees the neighbours' histories. Models
//! (SRNN/LSTM/GRU/CNN and hybrid CNN-RNN stacks, trained with hand-written
//! backpropagation and Adam) are evaluated with expanding-window
//! walk-forward validation and reported as R2/MSE/RMSE/MAE plus training
//! and prediction wall-clock times.
//!
//! Modules follow the pipeline stages:
//!
//! - [`ingest`]: counter export and neighbour candidate parsing
//! - [`preprocess`]: metric derivation, gridding, backfill, normalization
//! - [`statlag`]: ADF statistic and lag selection rules
//! - [`spatial`]: correlation matrix, neighbour sets, input assembly
//! - [`nn`]: tensors, layers, recurrent cells, Adam, gradient checking
//! - [`train`]: windows, walk-forward plans, fitting, grid search, persistence
//! - [`eval`]: accuracy metrics, timing, aggregation, report emission
//! - [`synth`]: coupled synthetic trace generator for verification
//! - [`config`] / [`pipeline`]: end-to-end orchestration and stage artifacts

pub mod config;
pub mod eval;
pub mod ingest;
pub mod nn;
pub mod pipeline;
pub mod preprocess;
pub mod spatial;
pub mod statlag;
pub mod synth;
pub mod train;

pub use config::PipelineConfig;
pub use eval::EvalReport;
pub use ingest::{NeighborCandidateList, RawCounterRecord, RawDataset};
pub use preprocess::{GridConfig, Metric, MetricSeries, NormalizationRecord};
pub use spatial::{CorrelationMatrix, NeighborSet, PredictionMode};
pub use train::{FoldPlan, TrainConfig, TrainedModel, WindowSet};
