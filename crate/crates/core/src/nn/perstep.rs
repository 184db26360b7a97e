//! Feature-axis convolution applied independently at every time step with
//! weights shared across steps. For an (L, F) input each step's F features
//! are treated as a single-channel length-F sequence, pushed through a
//! conv/pool chain, and the resulting map is flattened back into that
//! step's feature vector.

use super::layers::{Conv1d, Conv1dCache, MaxPool1d, MaxPool1dCache};
use super::tensor::Tensor;
use super::NnError;

#[derive(Debug, Clone)]
pub enum StepLayer {
    Conv(Conv1d),
    Pool(MaxPool1d),
}

#[derive(Debug, Clone)]
pub enum StepCache {
    Conv(Conv1dCache),
    Pool(MaxPool1dCache),
}

#[derive(Debug, Clone)]
pub struct PerStepConv {
    pub layers: Vec<StepLayer>,
}

#[derive(Debug, Clone)]
pub struct PerStepCache {
    in_shape: Vec<usize>,
    /// Per step, per inner layer.
    steps: Vec<Vec<StepCache>>,
}

impl PerStepConv {
    /// Output features per step for `in_features` inputs:
    /// (positions after the chain) × (channels after the chain).
    pub fn step_output(&self, in_features: usize) -> Result<(usize, usize), NnError> {
        let mut len = in_features;
        let mut ch = 1usize;
        for layer in &self.layers {
            match layer {
                StepLayer::Conv(c) => {
                    if c.in_channels() != ch {
                        return Err(NnError::InvalidSpec(format!(
                            "per-step conv expects {ch} channels, has {}",
                            c.in_channels()
                        )));
                    }
                    len = c.out_len(len)?;
                    ch = c.filters();
                }
                StepLayer::Pool(p) => {
                    len = p.out_len(len)?;
                }
            }
        }
        Ok((len, ch))
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, PerStepCache), NnError> {
        if x.rank() != 2 {
            return Err(NnError::ShapeMismatch {
                context: "per-step conv input",
                expected: vec![0, 0],
                found: x.shape().to_vec(),
            });
        }
        let steps = x.rows();
        let features = x.cols();
        let (out_len, out_ch) = self.step_output(features)?;
        let mut out = Tensor::zeros(&[steps, out_len * out_ch]);
        let mut caches = Vec::with_capacity(steps);
        for t in 0..steps {
            let mut cur = Tensor::from_vec(&[features, 1], x.row(t).to_vec())?;
            let mut step_caches = Vec::with_capacity(self.layers.len());
            for layer in &self.layers {
                let (next, cache) = match layer {
                    StepLayer::Conv(c) => {
                        let (y, cache) = c.forward(&cur)?;
                        (y, StepCache::Conv(cache))
                    }
                    StepLayer::Pool(p) => {
                        let (y, cache) = p.forward(&cur)?;
                        (y, StepCache::Pool(cache))
                    }
                };
                cur = next;
                step_caches.push(cache);
            }
            out.row_mut(t).copy_from_slice(cur.data());
            caches.push(step_caches);
        }
        Ok((
            out,
            PerStepCache {
                in_shape: x.shape().to_vec(),
                steps: caches,
            },
        ))
    }

    /// `grads` must hold one (gw, gb) pair per conv layer, in chain order.
    pub fn backward(
        &self,
        cache: &PerStepCache,
        grad_out: &Tensor,
        grads: &mut [Tensor],
    ) -> Result<Tensor, NnError> {
        let steps = cache.in_shape[0];
        let features = cache.in_shape[1];
        let (out_len, out_ch) = self.step_output(features)?;
        if grad_out.shape() != [steps, out_len * out_ch] {
            return Err(NnError::ShapeMismatch {
                context: "per-step conv grad",
                expected: vec![steps, out_len * out_ch],
                found: grad_out.shape().to_vec(),
            });
        }
        let mut dx = Tensor::zeros(&cache.in_shape);
        for t in 0..steps {
            let mut grad = Tensor::from_vec(&[out_len, out_ch], grad_out.row(t).to_vec())?;
            let mut grad_slot = grads.len();
            for (layer, layer_cache) in self.layers.iter().zip(&cache.steps[t]).rev() {
                grad = match (layer, layer_cache) {
                    (StepLayer::Conv(c), StepCache::Conv(cc)) => {
                        grad_slot -= 2;
                        let (gw, gb) = {
                            let (a, b) = grads.split_at_mut(grad_slot + 1);
                            (&mut a[grad_slot], &mut b[0])
                        };
                        c.backward(cc, &grad, gw, gb)?
                    }
                    (StepLayer::Pool(p), StepCache::Pool(pc)) => p.backward(pc, &grad)?,
                    _ => {
                        return Err(NnError::InvalidSpec(
                            "per-step cache out of sync with layers".into(),
                        ))
                    }
                };
            }
            dx.row_mut(t).copy_from_slice(grad.data());
        }
        Ok(dx)
    }

    pub fn conv_layers(&self) -> impl Iterator<Item = &Conv1d> {
        self.layers.iter().filter_map(|l| match l {
            StepLayer::Conv(c) => Some(c),
            StepLayer::Pool(_) => None,
        })
    }

    pub fn conv_layers_mut(&mut self) -> impl Iterator<Item = &mut Conv1d> {
        self.layers.iter_mut().filter_map(|l| match l {
            StepLayer::Conv(c) => Some(c),
            StepLayer::Pool(_) => None,
        })
    }
}
