//! Builders for the predictor architectures: the recurrent family, the
//! temporal and feature-axis CNNs, and the hybrid CNN-RNN stacks.

use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::model::{AdamSpec, LayerSpec, ModelSpec};
use super::recurrent::CellKind;
use super::NnError;
use crate::spatial::PredictionMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Srnn,
    Lstm,
    Gru,
    Cnn,
    CnnSrnn,
    CnnLstm,
    CnnGru,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Srnn,
        ModelKind::Lstm,
        ModelKind::Gru,
        ModelKind::Cnn,
        ModelKind::CnnSrnn,
        ModelKind::CnnLstm,
        ModelKind::CnnGru,
    ];

    pub fn is_hybrid(self) -> bool {
        matches!(self, ModelKind::CnnSrnn | ModelKind::CnnLstm | ModelKind::CnnGru)
    }

    pub fn recurrent_cell(self) -> Option<CellKind> {
        match self {
            ModelKind::Srnn | ModelKind::CnnSrnn => Some(CellKind::Srnn),
            ModelKind::Lstm | ModelKind::CnnLstm => Some(CellKind::Lstm),
            ModelKind::Gru | ModelKind::CnnGru => Some(CellKind::Gru),
            ModelKind::Cnn => None,
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            ModelKind::Srnn => "srnn",
            ModelKind::Lstm => "lstm",
            ModelKind::Gru => "gru",
            ModelKind::Cnn => "cnn",
            ModelKind::CnnSrnn => "cnn-srnn",
            ModelKind::CnnLstm => "cnn-lstm",
            ModelKind::CnnGru => "cnn-gru",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.slug())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "srnn" => Ok(ModelKind::Srnn),
            "lstm" => Ok(ModelKind::Lstm),
            "gru" => Ok(ModelKind::Gru),
            "cnn" => Ok(ModelKind::Cnn),
            "cnn-srnn" | "cnn_srnn" => Ok(ModelKind::CnnSrnn),
            "cnn-lstm" | "cnn_lstm" => Ok(ModelKind::CnnLstm),
            "cnn-gru" | "cnn_gru" => Ok(ModelKind::CnnGru),
            other => Err(format!("unknown model kind `{other}`")),
        }
    }
}

pub const DEFAULT_RECURRENT_UNITS: usize = 50;
pub const DEFAULT_CONV_FILTERS: usize = 16;
pub const DEFAULT_DEPTH: usize = 2;
pub const DEFAULT_DROPOUT: f64 = 0.3;

/// Two recurrent layers (the last one collapsing the sequence), each
/// followed by the table's ReLU and dropout.
fn recurrent_stack(cell: CellKind, units: usize, depth: usize) -> Vec<LayerSpec> {
    let mut layers = Vec::with_capacity(3 * depth);
    for d in 0..depth {
        layers.push(LayerSpec::Recurrent {
            cell,
            units,
            return_sequences: d + 1 < depth,
        });
        layers.push(LayerSpec::Activation {
            activation: Activation::Relu,
        });
        layers.push(LayerSpec::Dropout {
            rate: DEFAULT_DROPOUT,
        });
    }
    layers
}

/// Time-axis conv blocks: the first pool halves the sequence (size 2,
/// stride 2), later pools slide (size 2, stride 1).
fn temporal_conv_stack(filters: usize, depth: usize) -> Vec<LayerSpec> {
    let mut layers = Vec::with_capacity(2 * depth);
    for d in 0..depth {
        layers.push(LayerSpec::Conv1d {
            filters,
            kernel_size: 2,
            activation: Activation::Relu,
        });
        let (size, stride) = if d == 0 { (2, 2) } else { (2, 1) };
        layers.push(LayerSpec::MaxPool1d { size, stride });
    }
    layers
}

/// Feature-axis conv blocks: sliding pools (size 2, stride 1) except the
/// final block's unit pool, so M+1 input features reduce to M-2 positions
/// for the default two-block stack.
fn feature_conv_stack(filters: usize, depth: usize) -> Vec<LayerSpec> {
    let mut layers = Vec::with_capacity(2 * depth);
    for d in 0..depth {
        layers.push(LayerSpec::Conv1d {
            filters,
            kernel_size: 2,
            activation: Activation::Relu,
        });
        let size = if d + 1 == depth { 1 } else { 2 };
        layers.push(LayerSpec::MaxPool1d { size, stride: 1 });
    }
    layers
}

/// Builds the published architecture for `kind` at input length `lag`.
///
/// Temporal inputs have one feature; spatio-temporal inputs have `m_max+1`
/// (target plus padded/truncated neighbours). Hybrid kinds require the
/// spatio-temporal mode.
pub fn build_model(
    kind: ModelKind,
    mode: PredictionMode,
    lag: usize,
    m_max: usize,
    seed: u64,
    optimizer: AdamSpec,
) -> Result<ModelSpec, NnError> {
    build_model_custom(
        kind,
        mode,
        lag,
        m_max,
        match kind {
            ModelKind::Cnn => DEFAULT_CONV_FILTERS,
            _ => DEFAULT_RECURRENT_UNITS,
        },
        DEFAULT_DEPTH,
        seed,
        optimizer,
    )
}

/// `build_model` with the width/depth left open for hyperparameter search.
/// `units` is the kernel count for CNNs and the cell count for recurrent
/// stacks; `depth` is the block/layer count.
#[allow(clippy::too_many_arguments)]
pub fn build_model_custom(
    kind: ModelKind,
    mode: PredictionMode,
    lag: usize,
    m_max: usize,
    units: usize,
    depth: usize,
    seed: u64,
    optimizer: AdamSpec,
) -> Result<ModelSpec, NnError> {
    if kind.is_hybrid() && mode == PredictionMode::Temporal {
        return Err(NnError::InvalidSpec(format!(
            "{kind} combines feature-axis convolution with recurrence and needs the spatio-temporal mode"
        )));
    }
    let features = match mode {
        PredictionMode::Temporal => 1,
        PredictionMode::SpatioTemporal => m_max + 1,
    };
    let head = LayerSpec::Dense {
        units: 1,
        activation: Activation::Linear,
    };

    let mut layers = Vec::new();
    match kind {
        ModelKind::Srnn | ModelKind::Lstm | ModelKind::Gru => {
            layers.extend(recurrent_stack(
                kind.recurrent_cell().expect("recurrent kind"),
                units,
                depth,
            ));
            layers.push(head);
        }
        ModelKind::Cnn => {
            match mode {
                // along the time axis
                PredictionMode::Temporal => layers.extend(temporal_conv_stack(units, depth)),
                // along the feature axis, shared across time steps
                PredictionMode::SpatioTemporal => layers.push(LayerSpec::PerStepConv {
                    layers: feature_conv_stack(units, depth),
                }),
            }
            layers.push(LayerSpec::Flatten);
            layers.push(head);
        }
        ModelKind::CnnSrnn | ModelKind::CnnLstm | ModelKind::CnnGru => {
            layers.push(LayerSpec::PerStepConv {
                layers: feature_conv_stack(DEFAULT_CONV_FILTERS, DEFAULT_DEPTH),
            });
            layers.extend(recurrent_stack(
                kind.recurrent_cell().expect("hybrid kind"),
                units,
                depth,
            ));
            layers.push(head);
        }
    }

    let spec = ModelSpec {
        input_shape: (lag, features),
        layers,
        optimizer,
        seed,
    };
    spec.validate()?;
    Ok(spec)
}
