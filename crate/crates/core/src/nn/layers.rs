//! Feed-forward layers: dense, 1-D convolution, max pooling, dropout,
//! stand-alone activation and flatten. Each layer exposes a caching forward
//! pass and a backward pass that accumulates parameter gradients.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::activation::Activation;
use super::linalg::{dot, matvec, matvec_t_add, outer_add};
use super::tensor::Tensor;
use super::NnError;

fn shape_err(context: &'static str, expected: &[usize], found: &[usize]) -> NnError {
    NnError::ShapeMismatch {
        context,
        expected: expected.to_vec(),
        found: found.to_vec(),
    }
}

/// Fully connected layer on rank-1 inputs: activation(W·x + b).
#[derive(Debug, Clone)]
pub struct Dense {
    pub w: Tensor, // (units, in_dim)
    pub b: Tensor, // (units)
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct DenseCache {
    x: Tensor,
    z: Tensor,
    y: Tensor,
}

impl Dense {
    pub fn units(&self) -> usize {
        self.w.rows()
    }

    pub fn in_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, DenseCache), NnError> {
        if x.shape() != [self.in_dim()] {
            return Err(shape_err("dense input", &[self.in_dim()], x.shape()));
        }
        let units = self.units();
        let mut z = Tensor::zeros(&[units]);
        matvec(self.w.data(), units, self.in_dim(), x.data(), z.data_mut());
        for (zi, bi) in z.data_mut().iter_mut().zip(self.b.data()) {
            *zi += bi;
        }
        let mut y = z.clone();
        for v in y.data_mut() {
            *v = self.activation.apply(*v);
        }
        Ok((
            y.clone(),
            DenseCache {
                x: x.clone(),
                z,
                y,
            },
        ))
    }

    /// Returns the input gradient; `gw`/`gb` accumulate parameter gradients.
    pub fn backward(
        &self,
        cache: &DenseCache,
        grad_out: &Tensor,
        gw: &mut Tensor,
        gb: &mut Tensor,
    ) -> Result<Tensor, NnError> {
        let units = self.units();
        if grad_out.shape() != [units] {
            return Err(shape_err("dense grad", &[units], grad_out.shape()));
        }
        let mut dz = vec![0.0; units];
        for i in 0..units {
            dz[i] = grad_out.data()[i]
                * self
                    .activation
                    .derivative(cache.z.data()[i], cache.y.data()[i]);
        }
        outer_add(gw.data_mut(), &dz, cache.x.data());
        for (g, d) in gb.data_mut().iter_mut().zip(&dz) {
            *g += d;
        }
        let mut dx = Tensor::zeros(&[self.in_dim()]);
        matvec_t_add(self.w.data(), units, self.in_dim(), &dz, dx.data_mut());
        Ok(dx)
    }
}

/// Valid (no padding) 1-D convolution over a (positions, channels) input.
#[derive(Debug, Clone)]
pub struct Conv1d {
    pub w: Tensor, // (filters, kernel_size, in_channels)
    pub b: Tensor, // (filters)
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct Conv1dCache {
    x: Tensor,
    z: Tensor,
    y: Tensor,
}

impl Conv1d {
    pub fn filters(&self) -> usize {
        self.w.shape()[0]
    }

    pub fn kernel_size(&self) -> usize {
        self.w.shape()[1]
    }

    pub fn in_channels(&self) -> usize {
        self.w.shape()[2]
    }

    pub fn out_len(&self, in_len: usize) -> Result<usize, NnError> {
        if in_len < self.kernel_size() {
            return Err(NnError::InvalidSpec(format!(
                "conv1d input of {in_len} positions is shorter than kernel {}",
                self.kernel_size()
            )));
        }
        Ok(in_len - self.kernel_size() + 1)
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, Conv1dCache), NnError> {
        if x.rank() != 2 || x.cols() != self.in_channels() {
            return Err(shape_err(
                "conv1d input",
                &[0, self.in_channels()],
                x.shape(),
            ));
        }
        let (k, cin, f) = (self.kernel_size(), self.in_channels(), self.filters());
        let out_len = self.out_len(x.rows())?;
        let mut z = Tensor::zeros(&[out_len, f]);
        for p in 0..out_len {
            // kernel window seen as one contiguous slice of k*cin values
            let window = &x.data()[p * cin..(p + k) * cin];
            let zrow = z.row_mut(p);
            for (fi, zv) in zrow.iter_mut().enumerate() {
                let wslice = &self.w.data()[fi * k * cin..(fi + 1) * k * cin];
                *zv = dot(wslice, window) + self.b.data()[fi];
            }
        }
        let mut y = z.clone();
        for v in y.data_mut() {
            *v = self.activation.apply(*v);
        }
        Ok((
            y.clone(),
            Conv1dCache {
                x: x.clone(),
                z,
                y,
            },
        ))
    }

    pub fn backward(
        &self,
        cache: &Conv1dCache,
        grad_out: &Tensor,
        gw: &mut Tensor,
        gb: &mut Tensor,
    ) -> Result<Tensor, NnError> {
        let (k, cin, f) = (self.kernel_size(), self.in_channels(), self.filters());
        if grad_out.shape() != cache.z.shape() {
            return Err(shape_err("conv1d grad", cache.z.shape(), grad_out.shape()));
        }
        let out_len = grad_out.rows();
        let mut dx = Tensor::zeros(cache.x.shape());
        for p in 0..out_len {
            let window = &cache.x.data()[p * cin..(p + k) * cin];
            for fi in 0..f {
                let dz = grad_out.data()[p * f + fi]
                    * self
                        .activation
                        .derivative(cache.z.data()[p * f + fi], cache.y.data()[p * f + fi]);
                if dz == 0.0 {
                    continue;
                }
                gb.data_mut()[fi] += dz;
                let wslice = &self.w.data()[fi * k * cin..(fi + 1) * k * cin];
                let gwslice = &mut gw.data_mut()[fi * k * cin..(fi + 1) * k * cin];
                let dxwin = &mut dx.data_mut()[p * cin..(p + k) * cin];
                for idx in 0..k * cin {
                    gwslice[idx] += dz * window[idx];
                    dxwin[idx] += dz * wslice[idx];
                }
            }
        }
        Ok(dx)
    }
}

/// Per-channel max pooling along the position axis.
#[derive(Debug, Clone)]
pub struct MaxPool1d {
    pub size: usize,
    pub stride: usize,
}

#[derive(Debug, Clone)]
pub struct MaxPool1dCache {
    in_shape: Vec<usize>,
    /// Flat input index of the maximum for each output element.
    argmax: Vec<usize>,
}

impl MaxPool1d {
    pub fn out_len(&self, in_len: usize) -> Result<usize, NnError> {
        if self.size == 0 || self.stride == 0 {
            return Err(NnError::InvalidSpec("pool size/stride must be > 0".into()));
        }
        if in_len < self.size {
            return Err(NnError::InvalidSpec(format!(
                "pool of size {} over {in_len} positions",
                self.size
            )));
        }
        Ok((in_len - self.size) / self.stride + 1)
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, MaxPool1dCache), NnError> {
        if x.rank() != 2 {
            return Err(shape_err("maxpool input", &[0, 0], x.shape()));
        }
        let ch = x.cols();
        let out_len = self.out_len(x.rows())?;
        let mut y = Tensor::zeros(&[out_len, ch]);
        let mut argmax = vec![0usize; out_len * ch];
        for o in 0..out_len {
            let start = o * self.stride;
            for c in 0..ch {
                let mut best = f64::NEG_INFINITY;
                let mut best_idx = 0;
                for d in 0..self.size {
                    let idx = (start + d) * ch + c;
                    let v = x.data()[idx];
                    if v > best {
                        best = v;
                        best_idx = idx;
                    }
                }
                y.data_mut()[o * ch + c] = best;
                argmax[o * ch + c] = best_idx;
            }
        }
        Ok((
            y,
            MaxPool1dCache {
                in_shape: x.shape().to_vec(),
                argmax,
            },
        ))
    }

    pub fn backward(&self, cache: &MaxPool1dCache, grad_out: &Tensor) -> Result<Tensor, NnError> {
        if grad_out.len() != cache.argmax.len() {
            return Err(shape_err(
                "maxpool grad",
                &[cache.argmax.len()],
                grad_out.shape(),
            ));
        }
        let mut dx = Tensor::zeros(&cache.in_shape);
        for (g, &idx) in grad_out.data().iter().zip(&cache.argmax) {
            dx.data_mut()[idx] += g;
        }
        Ok(dx)
    }
}

/// Inverted dropout: surviving values are scaled by 1/(1-rate) at train
/// time so inference needs no rescaling.
#[derive(Debug, Clone)]
pub struct Dropout {
    pub rate: f64,
}

#[derive(Debug, Clone)]
pub struct DropoutCache {
    mask: Vec<f64>,
}

impl Dropout {
    pub fn forward_train(
        &self,
        x: &Tensor,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Tensor, DropoutCache), NnError> {
        if !(0.0..1.0).contains(&self.rate) {
            return Err(NnError::InvalidSpec(format!(
                "dropout rate {} outside [0, 1)",
                self.rate
            )));
        }
        if self.rate == 0.0 {
            return Ok((
                x.clone(),
                DropoutCache {
                    mask: vec![1.0; x.len()],
                },
            ));
        }
        let keep_scale = 1.0 / (1.0 - self.rate);
        let mask: Vec<f64> = (0..x.len())
            .map(|_| {
                if rng.gen::<f64>() < self.rate {
                    0.0
                } else {
                    keep_scale
                }
            })
            .collect();
        let mut y = x.clone();
        for (v, m) in y.data_mut().iter_mut().zip(&mask) {
            *v *= m;
        }
        Ok((y, DropoutCache { mask }))
    }

    pub fn forward_infer(&self, x: &Tensor) -> Tensor {
        x.clone()
    }

    pub fn backward(&self, cache: &DropoutCache, grad_out: &Tensor) -> Result<Tensor, NnError> {
        if grad_out.len() != cache.mask.len() {
            return Err(shape_err(
                "dropout grad",
                &[cache.mask.len()],
                grad_out.shape(),
            ));
        }
        let mut dx = grad_out.clone();
        for (v, m) in dx.data_mut().iter_mut().zip(&cache.mask) {
            *v *= m;
        }
        Ok(dx)
    }
}

/// Stand-alone element-wise activation (used after recurrent layers).
#[derive(Debug, Clone)]
pub struct ActLayer {
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct ActLayerCache {
    z: Tensor,
    y: Tensor,
}

impl ActLayer {
    pub fn forward(&self, x: &Tensor) -> (Tensor, ActLayerCache) {
        let mut y = x.clone();
        for v in y.data_mut() {
            *v = self.activation.apply(*v);
        }
        (
            y.clone(),
            ActLayerCache {
                z: x.clone(),
                y,
            },
        )
    }

    pub fn backward(&self, cache: &ActLayerCache, grad_out: &Tensor) -> Result<Tensor, NnError> {
        if grad_out.len() != cache.z.len() {
            return Err(shape_err("activation grad", cache.z.shape(), grad_out.shape()));
        }
        let mut dx = grad_out.clone();
        for (i, v) in dx.data_mut().iter_mut().enumerate() {
            *v *= self
                .activation
                .derivative(cache.z.data()[i], cache.y.data()[i]);
        }
        Ok(dx)
    }
}

/// Collapses a rank-2 tensor to rank-1.
#[derive(Debug, Clone)]
pub struct Flatten;

#[derive(Debug, Clone)]
pub struct FlattenCache {
    in_shape: Vec<usize>,
}

impl Flatten {
    pub fn forward(&self, x: &Tensor) -> (Tensor, FlattenCache) {
        let cache = FlattenCache {
            in_shape: x.shape().to_vec(),
        };
        let flat = x.clone().reshaped(&[x.len()]).expect("same volume");
        (flat, cache)
    }

    pub fn backward(&self, cache: &FlattenCache, grad_out: &Tensor) -> Result<Tensor, NnError> {
        grad_out.clone().reshaped(&cache.in_shape)
    }
}
