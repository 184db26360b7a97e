//! Model description, instantiation, and the forward/backward engine.
//!
//! A [`ModelSpec`] is a serializable blueprint: input shape, layer list,
//! optimizer settings and the weight-init seed. [`Model`] is the
//! instantiated network; its training forward pass returns a cache that
//! [`Model::backward`] consumes to accumulate exact reverse-mode gradients
//! for every parameter, including backprop through time for recurrent
//! layers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::layers::{
    ActLayer, ActLayerCache, Conv1d, Conv1dCache, Dense, DenseCache, Dropout, DropoutCache,
    Flatten, FlattenCache, MaxPool1d, MaxPool1dCache,
};
use super::perstep::{PerStepCache, PerStepConv, StepLayer};
use super::recurrent::{CellKind, Recurrent, RecurrentCache};
use super::tensor::Tensor;
use super::NnError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Dense {
        units: usize,
        activation: Activation,
    },
    Conv1d {
        filters: usize,
        kernel_size: usize,
        activation: Activation,
    },
    MaxPool1d {
        size: usize,
        stride: usize,
    },
    Dropout {
        rate: f64,
    },
    Activation {
        activation: Activation,
    },
    Flatten,
    Recurrent {
        cell: CellKind,
        units: usize,
        return_sequences: bool,
    },
    /// Conv/pool chain applied per time step along the feature axis,
    /// weights shared across steps.
    PerStepConv {
        layers: Vec<LayerSpec>,
    },
}

/// Adam hyperparameters (bias-corrected moments).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamSpec {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamSpec {
    fn default() -> Self {
        AdamSpec {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamSpec {
    pub fn with_learning_rate(lr: f64) -> Self {
        AdamSpec {
            learning_rate: lr,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// (time steps, features per step).
    pub input_shape: (usize, usize),
    pub layers: Vec<LayerSpec>,
    pub optimizer: AdamSpec,
    pub seed: u64,
}

fn layer_out_shape(spec: &LayerSpec, in_shape: &[usize]) -> Result<Vec<usize>, NnError> {
    let need_rank2 = |name: &str| {
        NnError::InvalidSpec(format!(
            "{name} needs a rank-2 input, got shape {in_shape:?}"
        ))
    };
    match spec {
        LayerSpec::Dense { units, .. } => {
            if in_shape.len() != 1 {
                return Err(NnError::InvalidSpec(format!(
                    "dense needs a rank-1 input, got shape {in_shape:?}"
                )));
            }
            Ok(vec![*units])
        }
        LayerSpec::Conv1d {
            filters,
            kernel_size,
            ..
        } => {
            if in_shape.len() != 2 {
                return Err(need_rank2("conv1d"));
            }
            if in_shape[0] < *kernel_size {
                return Err(NnError::InvalidSpec(format!(
                    "conv1d kernel {kernel_size} over {} positions",
                    in_shape[0]
                )));
            }
            Ok(vec![in_shape[0] - kernel_size + 1, *filters])
        }
        LayerSpec::MaxPool1d { size, stride } => {
            if in_shape.len() != 2 {
                return Err(need_rank2("maxpool1d"));
            }
            if *size == 0 || *stride == 0 || in_shape[0] < *size {
                return Err(NnError::InvalidSpec(format!(
                    "maxpool of size {size}/stride {stride} over {} positions",
                    in_shape[0]
                )));
            }
            Ok(vec![(in_shape[0] - size) / stride + 1, in_shape[1]])
        }
        LayerSpec::Dropout { rate } => {
            if !(0.0..1.0).contains(rate) {
                return Err(NnError::InvalidSpec(format!("dropout rate {rate}")));
            }
            Ok(in_shape.to_vec())
        }
        LayerSpec::Activation { .. } => Ok(in_shape.to_vec()),
        LayerSpec::Flatten => {
            if in_shape.len() != 2 {
                return Err(need_rank2("flatten"));
            }
            Ok(vec![in_shape[0] * in_shape[1]])
        }
        LayerSpec::Recurrent {
            units,
            return_sequences,
            ..
        } => {
            if in_shape.len() != 2 || in_shape[0] == 0 {
                return Err(need_rank2("recurrent"));
            }
            Ok(if *return_sequences {
                vec![in_shape[0], *units]
            } else {
                vec![*units]
            })
        }
        LayerSpec::PerStepConv { layers } => {
            if in_shape.len() != 2 {
                return Err(need_rank2("per-step conv"));
            }
            let mut len = in_shape[1];
            let mut ch = 1usize;
            for inner in layers {
                match inner {
                    LayerSpec::Conv1d {
                        filters,
                        kernel_size,
                        ..
                    } => {
                        if len < *kernel_size {
                            return Err(NnError::InvalidSpec(format!(
                                "per-step conv kernel {kernel_size} over {len} features"
                            )));
                        }
                        len = len - kernel_size + 1;
                        ch = *filters;
                    }
                    LayerSpec::MaxPool1d { size, stride } => {
                        if *size == 0 || *stride == 0 || len < *size {
                            return Err(NnError::InvalidSpec(format!(
                                "per-step pool of size {size} over {len} features"
                            )));
                        }
                        len = (len - size) / stride + 1;
                    }
                    other => {
                        return Err(NnError::InvalidSpec(format!(
                            "per-step conv may only contain conv/pool layers, found {other:?}"
                        )))
                    }
                }
            }
            Ok(vec![in_shape[0], len * ch])
        }
    }
}

impl ModelSpec {
    /// Checks layer compatibility and returns the shape after every layer.
    pub fn shape_chain(&self) -> Result<Vec<Vec<usize>>, NnError> {
        if self.input_shape.0 == 0 || self.input_shape.1 == 0 {
            return Err(NnError::InvalidSpec("empty input shape".into()));
        }
        let mut shapes = vec![vec![self.input_shape.0, self.input_shape.1]];
        for layer in &self.layers {
            let next = layer_out_shape(layer, shapes.last().unwrap())?;
            shapes.push(next);
        }
        if shapes.last().map(Vec::as_slice) != Some(&[1]) {
            return Err(NnError::InvalidSpec(format!(
                "model must end in a scalar output, got {:?}",
                shapes.last()
            )));
        }
        Ok(shapes)
    }

    pub fn validate(&self) -> Result<(), NnError> {
        self.shape_chain().map(|_| ())
    }

    /// Total learnable parameter count.
    pub fn param_count(&self) -> Result<usize, NnError> {
        let shapes = self.shape_chain()?;
        let mut count = 0usize;
        for (layer, in_shape) in self.layers.iter().zip(&shapes) {
            count += match layer {
                LayerSpec::Dense { units, .. } => units * in_shape[0] + units,
                LayerSpec::Conv1d {
                    filters,
                    kernel_size,
                    ..
                } => filters * kernel_size * in_shape[1] + filters,
                LayerSpec::Recurrent { cell, units, .. } => {
                    let g = cell.gate_count();
                    g * units * in_shape[1] + g * units * units + g * units
                }
                LayerSpec::PerStepConv { layers } => {
                    let mut ch = 1usize;
                    let mut inner_count = 0usize;
                    for inner in layers {
                        if let LayerSpec::Conv1d {
                            filters,
                            kernel_size,
                            ..
                        } = inner
                        {
                            inner_count += filters * kernel_size * ch + filters;
                            ch = *filters;
                        }
                    }
                    inner_count
                }
                _ => 0,
            };
        }
        Ok(count)
    }

    /// Copy of the spec with every dropout rate forced to zero (used by
    /// gradient checking).
    pub fn without_dropout(&self) -> ModelSpec {
        fn strip(layer: &LayerSpec) -> LayerSpec {
            match layer {
                LayerSpec::Dropout { .. } => LayerSpec::Dropout { rate: 0.0 },
                LayerSpec::PerStepConv { layers } => LayerSpec::PerStepConv {
                    layers: layers.iter().map(strip).collect(),
                },
                other => other.clone(),
            }
        }
        ModelSpec {
            layers: self.layers.iter().map(strip).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Layer {
    Dense(Dense),
    Conv(Conv1d),
    Pool(MaxPool1d),
    Dropout(Dropout),
    Act(ActLayer),
    Flatten(Flatten),
    Recurrent(Recurrent),
    PerStep(PerStepConv),
}

#[derive(Debug, Clone)]
pub(crate) enum LayerCache {
    Dense(DenseCache),
    Conv(Conv1dCache),
    Pool(MaxPool1dCache),
    Dropout(DropoutCache),
    Act(ActLayerCache),
    Flatten(FlattenCache),
    Recurrent(RecurrentCache),
    PerStep(PerStepCache),
    /// Placeholder for layers that skipped caching (inference dropout).
    Inactive,
}

/// Cache of one training forward pass, consumed by [`Model::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub(crate) layers: Vec<LayerCache>,
    pub(crate) train: bool,
    pub prediction: f64,
}

/// Per-parameter gradient buffers aligned with [`Model::param_tensors`].
#[derive(Debug, Clone)]
pub struct Gradients {
    pub(crate) slots: Vec<Tensor>,
}

impl Gradients {
    pub fn zero(&mut self) {
        for t in &mut self.slots {
            t.fill(0.0);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in &mut self.slots {
            for v in t.data_mut() {
                *v *= factor;
            }
        }
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.slots
    }

    pub fn add(&mut self, other: &Gradients) {
        for (a, b) in self.slots.iter_mut().zip(&other.slots) {
            super::linalg::add_assign(a.data_mut(), b.data());
        }
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    layers: Vec<Layer>,
    dropout_rng: ChaCha8Rng,
}

fn uniform_tensor(rng: &mut ChaCha8Rng, shape: &[usize], limit: f64) -> Tensor {
    let mut t = Tensor::zeros(shape);
    for v in t.data_mut() {
        *v = rng.gen_range(-limit..limit);
    }
    t
}

fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

fn build_layer(spec: &LayerSpec, in_shape: &[usize], rng: &mut ChaCha8Rng) -> Layer {
    match spec {
        LayerSpec::Dense { units, activation } => {
            let in_dim = in_shape[0];
            Layer::Dense(Dense {
                w: uniform_tensor(rng, &[*units, in_dim], glorot_limit(in_dim, *units)),
                b: Tensor::zeros(&[*units]),
                activation: *activation,
            })
        }
        LayerSpec::Conv1d {
            filters,
            kernel_size,
            activation,
        } => {
            let cin = in_shape[1];
            let limit = glorot_limit(kernel_size * cin, filters * kernel_size);
            Layer::Conv(Conv1d {
                w: uniform_tensor(rng, &[*filters, *kernel_size, cin], limit),
                b: Tensor::zeros(&[*filters]),
                activation: *activation,
            })
        }
        LayerSpec::MaxPool1d { size, stride } => Layer::Pool(MaxPool1d {
            size: *size,
            stride: *stride,
        }),
        LayerSpec::Dropout { rate } => Layer::Dropout(Dropout { rate: *rate }),
        LayerSpec::Activation { activation } => Layer::Act(ActLayer {
            activation: *activation,
        }),
        LayerSpec::Flatten => Layer::Flatten(Flatten),
        LayerSpec::Recurrent {
            cell,
            units,
            return_sequences,
        } => {
            let in_dim = in_shape[1];
            let g = cell.gate_count();
            Layer::Recurrent(Recurrent {
                cell: *cell,
                units: *units,
                in_dim,
                return_sequences: *return_sequences,
                wx: uniform_tensor(rng, &[g * units, in_dim], glorot_limit(in_dim, *units)),
                wh: uniform_tensor(rng, &[g * units, *units], glorot_limit(*units, *units)),
                b: Tensor::zeros(&[g * units]),
            })
        }
        LayerSpec::PerStepConv { layers } => {
            let mut inner = Vec::with_capacity(layers.len());
            let mut shape = vec![in_shape[1], 1];
            for l in layers {
                let built = build_layer(l, &shape, rng);
                shape = layer_out_shape(l, &shape).expect("validated spec");
                match built {
                    Layer::Conv(c) => inner.push(StepLayer::Conv(c)),
                    Layer::Pool(p) => inner.push(StepLayer::Pool(p)),
                    _ => unreachable!("validated spec allows only conv/pool"),
                }
            }
            Layer::PerStep(PerStepConv { layers: inner })
        }
    }
}

impl Model {
    /// Builds and initializes a model. Weight init is fully determined by
    /// `spec.seed`.
    pub fn new(spec: &ModelSpec) -> Result<Model, NnError> {
        let shapes = spec.shape_chain()?;
        let mut init_rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let layers = spec
            .layers
            .iter()
            .zip(&shapes)
            .map(|(l, s)| build_layer(l, s, &mut init_rng))
            .collect();
        Ok(Model {
            spec: spec.clone(),
            layers,
            // distinct stream from weight init
            dropout_rng: ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15),
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn check_input(&self, input: &Tensor) -> Result<(), NnError> {
        let (l, f) = self.spec.input_shape;
        if input.shape() != [l, f] {
            return Err(NnError::ShapeMismatch {
                context: "model input",
                expected: vec![l, f],
                found: input.shape().to_vec(),
            });
        }
        Ok(())
    }

    fn forward_layers(
        &self,
        input: &Tensor,
        train: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<(f64, Vec<LayerCache>), NnError> {
        self.check_input(input)?;
        let mut cur = input.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (next, cache) = match layer {
                Layer::Dense(l) => {
                    let (y, c) = l.forward(&cur)?;
                    (y, LayerCache::Dense(c))
                }
                Layer::Conv(l) => {
                    let (y, c) = l.forward(&cur)?;
                    (y, LayerCache::Conv(c))
                }
                Layer::Pool(l) => {
                    let (y, c) = l.forward(&cur)?;
                    (y, LayerCache::Pool(c))
                }
                Layer::Dropout(l) => {
                    if train {
                        let (y, c) = l.forward_train(&cur, rng)?;
                        (y, LayerCache::Dropout(c))
                    } else {
                        (l.forward_infer(&cur), LayerCache::Inactive)
                    }
                }
                Layer::Act(l) => {
                    let (y, c) = l.forward(&cur);
                    (y, LayerCache::Act(c))
                }
                Layer::Flatten(l) => {
                    let (y, c) = l.forward(&cur);
                    (y, LayerCache::Flatten(c))
                }
                Layer::Recurrent(l) => {
                    let (y, c) = l.forward(&cur)?;
                    (y, LayerCache::Recurrent(c))
                }
                Layer::PerStep(l) => {
                    let (y, c) = l.forward(&cur)?;
                    (y, LayerCache::PerStep(c))
                }
            };
            cur = next;
            caches.push(cache);
        }
        debug_assert_eq!(cur.shape(), &[1]);
        Ok((cur.data()[0], caches))
    }

    /// Training-mode forward pass: dropout active, cache returned.
    pub fn forward_train(&mut self, input: &Tensor) -> Result<(f64, ForwardCache), NnError> {
        let mut rng = self.dropout_rng.clone();
        let (pred, caches) = self.forward_layers(input, true, &mut rng)?;
        self.dropout_rng = rng;
        Ok((
            pred,
            ForwardCache {
                layers: caches,
                train: true,
                prediction: pred,
            },
        ))
    }

    /// Deterministic inference: a pure function of (weights, input).
    pub fn predict(&self, input: &Tensor) -> Result<f64, NnError> {
        let mut rng = ChaCha8Rng::seed_from_u64(0); // never consumed in infer mode
        let (pred, _) = self.forward_layers(input, false, &mut rng)?;
        Ok(pred)
    }

    /// Accumulates gradients of the loss into `grads` given the upstream
    /// derivative `d_loss` = dL/dprediction.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        d_loss: f64,
        grads: &mut Gradients,
    ) -> Result<(), NnError> {
        if !cache.train || cache.layers.len() != self.layers.len() {
            return Err(NnError::InvalidCache);
        }
        if grads.slots.len() != self.param_tensors().len() {
            return Err(NnError::InvalidCache);
        }
        // per-layer slot ranges, walked back to front
        let mut slot_end = grads.slots.len();
        let mut grad = Tensor::scalar(d_loss);
        for (layer, lcache) in self.layers.iter().zip(&cache.layers).rev() {
            let n_params = layer_param_count(layer);
            let slot_start = slot_end - n_params;
            let slots = &mut grads.slots[slot_start..slot_end];
            grad = match (layer, lcache) {
                (Layer::Dense(l), LayerCache::Dense(c)) => {
                    let (gw, gb) = two(slots);
                    l.backward(c, &grad, gw, gb)?
                }
                (Layer::Conv(l), LayerCache::Conv(c)) => {
                    let (gw, gb) = two(slots);
                    l.backward(c, &grad, gw, gb)?
                }
                (Layer::Pool(l), LayerCache::Pool(c)) => l.backward(c, &grad)?,
                (Layer::Dropout(l), LayerCache::Dropout(c)) => l.backward(c, &grad)?,
                (Layer::Act(l), LayerCache::Act(c)) => l.backward(c, &grad)?,
                (Layer::Flatten(l), LayerCache::Flatten(c)) => l.backward(c, &grad)?,
                (Layer::Recurrent(l), LayerCache::Recurrent(c)) => {
                    let (gwx, rest) = slots.split_first_mut().expect("three slots");
                    let (gwh, rest) = rest.split_first_mut().expect("two slots");
                    l.backward(c, &grad, gwx, gwh, &mut rest[0])?
                }
                (Layer::PerStep(l), LayerCache::PerStep(c)) => l.backward(c, &grad, slots)?,
                _ => return Err(NnError::InvalidCache),
            };
            slot_end = slot_start;
        }
        Ok(())
    }

    /// Learnable parameters in a stable order.
    pub fn param_tensors(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Dense(l) => out.extend([&l.w, &l.b]),
                Layer::Conv(l) => out.extend([&l.w, &l.b]),
                Layer::Recurrent(l) => out.extend([&l.wx, &l.wh, &l.b]),
                Layer::PerStep(l) => {
                    for c in l.conv_layers() {
                        out.extend([&c.w, &c.b]);
                    }
                }
                _ => {}
            }
        }
        out
    }

    pub fn param_tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Dense(l) => out.extend([&mut l.w, &mut l.b]),
                Layer::Conv(l) => out.extend([&mut l.w, &mut l.b]),
                Layer::Recurrent(l) => out.extend([&mut l.wx, &mut l.wh, &mut l.b]),
                Layer::PerStep(l) => {
                    for c in l.conv_layers_mut() {
                        out.push(&mut c.w);
                        out.push(&mut c.b);
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Stable names matching [`Model::param_tensors`] order.
    pub fn param_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            match layer {
                Layer::Dense(_) | Layer::Conv(_) => {
                    out.push(format!("layer{i}.w"));
                    out.push(format!("layer{i}.b"));
                }
                Layer::Recurrent(_) => {
                    out.push(format!("layer{i}.wx"));
                    out.push(format!("layer{i}.wh"));
                    out.push(format!("layer{i}.b"));
                }
                Layer::PerStep(l) => {
                    for (j, _) in l.conv_layers().enumerate() {
                        out.push(format!("layer{i}.conv{j}.w"));
                        out.push(format!("layer{i}.conv{j}.b"));
                    }
                }
                _ => {}
            }
        }
        out
    }

    pub fn new_gradients(&self) -> Gradients {
        Gradients {
            slots: self
                .param_tensors()
                .iter()
                .map(|t| Tensor::zeros(t.shape()))
                .collect(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.param_tensors().iter().map(|t| t.len()).sum()
    }
}

fn layer_param_count(layer: &Layer) -> usize {
    match layer {
        Layer::Dense(_) | Layer::Conv(_) => 2,
        Layer::Recurrent(_) => 3,
        Layer::PerStep(l) => 2 * l.conv_layers().count(),
        _ => 0,
    }
}

fn two(slots: &mut [Tensor]) -> (&mut Tensor, &mut Tensor) {
    let (a, b) = slots.split_at_mut(1);
    (&mut a[0], &mut b[0])
}

/// Squared-error loss and its derivative with respect to the prediction.
pub fn mse_loss(prediction: f64, target: f64) -> (f64, f64) {
    let diff = prediction - target;
    (diff * diff, 2.0 * diff)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec(layers: Vec<LayerSpec>) -> ModelSpec {
        ModelSpec {
            input_shape: (4, 2),
            layers,
            optimizer: AdamSpec::default(),
            seed: 7,
        }
    }

    #[test]
    fn mse_loss_cases() {
        assert_eq!(mse_loss(1.0, 1.0), (0.0, 0.0));
        assert_eq!(mse_loss(2.0, 0.0), (4.0, 4.0));
        assert!(mse_loss(-3.0, 1.5).0 >= 0.0);
    }

    #[test]
    fn spec_validates_shape_chain() {
        let spec = tiny_spec(vec![
            LayerSpec::Flatten,
            LayerSpec::Dense {
                units: 3,
                activation: Activation::Tanh,
            },
            LayerSpec::Dense {
                units: 1,
                activation: Activation::Linear,
            },
        ]);
        let shapes = spec.shape_chain().unwrap();
        assert_eq!(shapes, vec![vec![4, 2], vec![8], vec![3], vec![1]]);
    }

    #[test]
    fn spec_rejects_non_scalar_output() {
        let spec = tiny_spec(vec![LayerSpec::Flatten, LayerSpec::Dense {
            units: 3,
            activation: Activation::Linear,
        }]);
        assert!(matches!(spec.validate(), Err(NnError::InvalidSpec(_))));
    }

    #[test]
    fn spec_rejects_dense_on_sequence() {
        let spec = tiny_spec(vec![LayerSpec::Dense {
            units: 1,
            activation: Activation::Linear,
        }]);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn init_is_seed_deterministic() {
        let spec = tiny_spec(vec![
            LayerSpec::Recurrent {
                cell: CellKind::Lstm,
                units: 5,
                return_sequences: false,
            },
            LayerSpec::Dense {
                units: 1,
                activation: Activation::Linear,
            },
        ]);
        let a = Model::new(&spec).unwrap();
        let b = Model::new(&spec).unwrap();
        for (x, y) in a.param_tensors().iter().zip(b.param_tensors()) {
            assert_eq!(x, &y);
        }
        let other = Model::new(&ModelSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(
            a.param_tensors()[0].data(),
            other.param_tensors()[0].data()
        );
    }

    #[test]
    fn inference_is_repeatable() {
        let spec = tiny_spec(vec![
            LayerSpec::Recurrent {
                cell: CellKind::Gru,
                units: 6,
                return_sequences: false,
            },
            LayerSpec::Activation {
                activation: Activation::Relu,
            },
            LayerSpec::Dropout { rate: 0.3 },
            LayerSpec::Dense {
                units: 1,
                activation: Activation::Linear,
            },
        ]);
        let model = Model::new(&spec).unwrap();
        let x = Tensor::from_vec(&[4, 2], (0..8).map(|i| i as f64 * 0.1).collect()).unwrap();
        let a = model.predict(&x).unwrap();
        let b = model.predict(&x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_dropout_train_equals_infer() {
        let spec = tiny_spec(vec![
            LayerSpec::Recurrent {
                cell: CellKind::Srnn,
                units: 4,
                return_sequences: true,
            },
            LayerSpec::Dropout { rate: 0.0 },
            LayerSpec::Recurrent {
                cell: CellKind::Srnn,
                units: 4,
                return_sequences: false,
            },
            LayerSpec::Dense {
                units: 1,
                activation: Activation::Linear,
            },
        ]);
        let mut model = Model::new(&spec).unwrap();
        let x = Tensor::from_vec(&[4, 2], (0..8).map(|i| (i as f64).sin()).collect()).unwrap();
        let infer = model.predict(&x).unwrap();
        let (train, _) = model.forward_train(&x).unwrap();
        assert_eq!(train, infer);
    }

    #[test]
    fn dropout_rate_affects_train_mode_only() {
        let spec = tiny_spec(vec![
            LayerSpec::Flatten,
            LayerSpec::Dense {
                units: 6,
                activation: Activation::Tanh,
            },
            LayerSpec::Dropout { rate: 0.5 },
            LayerSpec::Dense {
                units: 1,
                activation: Activation::Linear,
            },
        ]);
        let mut model = Model::new(&spec).unwrap();
        let x = Tensor::from_vec(&[4, 2], vec![0.5; 8]).unwrap();
        let infer = model.predict(&x).unwrap();
        // with rate 0.5 most train passes differ from the deterministic path
        let distinct = (0..16)
            .filter(|_| model.forward_train(&x).unwrap().0 != infer)
            .count();
        assert!(distinct > 0);
    }

    #[test]
    fn backward_without_train_cache_is_error() {
        let spec = tiny_spec(vec![
            LayerSpec::Flatten,
            LayerSpec::Dense {
                units: 1,
                activation: Activation::Linear,
            },
        ]);
        let mut model = Model::new(&spec).unwrap();
        let x = Tensor::from_vec(&[4, 2], vec![0.1; 8]).unwrap();
        let (_, mut cache) = model.forward_train(&x).unwrap();
        cache.train = false;
        let mut grads = model.new_gradients();
        assert!(matches!(
            model.backward(&cache, 1.0, &mut grads),
            Err(NnError::InvalidCache)
        ));
    }

    #[test]
    fn zero_loss_gradient_means_zero_param_gradients() {
        let spec = tiny_spec(vec![
            LayerSpec::Recurrent {
                cell: CellKind::Lstm,
                units: 3,
                return_sequences: false,
            },
            LayerSpec::Dense {
                units: 1,
                activation: Activation::Linear,
            },
        ]);
        let mut model = Model::new(&spec).unwrap();
        let x = Tensor::from_vec(&[4, 2], vec![0.3; 8]).unwrap();
        let (_, cache) = model.forward_train(&x).unwrap();
        let mut grads = model.new_gradients();
        model.backward(&cache, 0.0, &mut grads).unwrap();
        for t in grads.tensors() {
            assert!(t.data().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn linear_dense_gradient_matches_hand_formula() {
        // single linear dense on a flattened input with MSE
        let spec = ModelSpec {
            input_shape: (1, 3),
            layers: vec![
                LayerSpec::Flatten,
                LayerSpec::Dense {
                    units: 1,
                    activation: Activation::Linear,
                },
            ],
            optimizer: AdamSpec::default(),
            seed: 3,
        };
        let mut model = Model::new(&spec).unwrap();
        let x = Tensor::from_vec(&[1, 3], vec![1.0, -2.0, 0.5]).unwrap();
        let target = 0.7;
        let (pred, cache) = model.forward_train(&x).unwrap();
        let (_, d_loss) = mse_loss(pred, target);
        let mut grads = model.new_gradients();
        model.backward(&cache, d_loss, &mut grads).unwrap();
        // dW = 2(pred - target) * x
        for (g, xi) in grads.tensors()[0].data().iter().zip(x.data()) {
            assert!((g - d_loss * xi).abs() < 1e-12);
        }
        assert!((grads.tensors()[1].data()[0] - d_loss).abs() < 1e-12);
    }
}
