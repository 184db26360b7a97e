//! Neural-network core with hand-written backpropagation: dense, 1-D
//! convolution, max pooling, dropout, SRNN/LSTM/GRU cells with BPTT, MSE
//! loss, Adam, finite-difference gradient checking diagnostics, and
//! builders for the predictor architectures.

pub mod activation;
pub mod adam;
pub mod build;
pub mod gradcheck;
pub mod layers;
pub(crate) mod linalg;
pub mod model;
pub mod perstep;
pub mod recurrent;
pub mod tensor;

use thiserror::Error;

pub use activation::Activation;
pub use adam::Adam;
pub use build::{build_model, build_model_custom, ModelKind};
pub use gradcheck::gradient_check;
pub use model::{mse_loss, AdamSpec, ForwardCache, Gradients, LayerSpec, Model, ModelSpec};
pub use recurrent::CellKind;
pub use tensor::Tensor;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch in {context}: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        context: &'static str,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("non-finite gradient in {param}; training aborted")]
    NonFiniteGradient { param: String },
    #[error("forward cache is stale or was not produced in train mode")]
    InvalidCache,
}
