//! Adam optimizer with bias-corrected first and second moments.

use super::model::{AdamSpec, Gradients, Model};
use super::NnError;

#[derive(Debug, Clone)]
pub struct Adam {
    spec: AdamSpec,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(spec: AdamSpec, model: &Model) -> Adam {
        let sizes: Vec<usize> = model.param_tensors().iter().map(|t| t.len()).collect();
        Adam {
            spec,
            step: 0,
            m: sizes.iter().map(|n| vec![0.0; *n]).collect(),
            v: sizes.iter().map(|n| vec![0.0; *n]).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Applies one update. Rejects non-finite gradients with the offending
    /// parameter named, leaving the weights untouched.
    pub fn step(&mut self, model: &mut Model, grads: &Gradients) -> Result<(), NnError> {
        for (slot, g) in grads.tensors().iter().enumerate() {
            if !g.all_finite() {
                let name = model
                    .param_names()
                    .get(slot)
                    .cloned()
                    .unwrap_or_else(|| format!("slot{slot}"));
                return Err(NnError::NonFiniteGradient { param: name });
            }
        }
        self.step += 1;
        let t = self.step;
        let b1 = self.spec.beta1;
        let b2 = self.spec.beta2;
        let bias1 = 1.0 - b1.powi(t as i32);
        let bias2 = 1.0 - b2.powi(t as i32);
        let lr = self.spec.learning_rate;
        let eps = self.spec.epsilon;

        for ((param, grad), (m, v)) in model
            .param_tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for (k, p) in param.data_mut().iter_mut().enumerate() {
                let g = grad.data()[k];
                m[k] = b1 * m[k] + (1.0 - b1) * g;
                v[k] = b2 * v[k] + (1.0 - b2) * g * g;
                let m_hat = m[k] / bias1;
                let v_hat = v[k] / bias2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::activation::Activation;
    use crate::nn::model::{LayerSpec, ModelSpec};
    use crate::nn::tensor::Tensor;

    fn one_weight_model() -> (Model, ModelSpec) {
        let spec = ModelSpec {
            input_shape: (1, 1),
            layers: vec![
                LayerSpec::Flatten,
                LayerSpec::Dense {
                    units: 1,
                    activation: Activation::Linear,
                },
            ],
            optimizer: AdamSpec::with_learning_rate(0.01),
            seed: 1,
        };
        (Model::new(&spec).unwrap(), spec)
    }

    #[test]
    fn first_step_moves_by_lr_sign() {
        let (mut model, spec) = one_weight_model();
        let before = model.param_tensors()[0].data()[0];
        let mut adam = Adam::new(spec.optimizer.clone(), &model);
        let mut grads = model.new_gradients();
        grads.slots[0] = Tensor::from_vec(&[1, 1], vec![0.37]).unwrap();
        adam.step(&mut model, &grads).unwrap();
        let after = model.param_tensors()[0].data()[0];
        // bias correction at t=1 gives m̂=g, v̂=g², so the move is ≈ lr·sign(g)
        assert!(((before - after) - 0.01).abs() < 1e-6);
    }

    #[test]
    fn zero_gradients_are_a_fixed_point() {
        let (mut model, spec) = one_weight_model();
        let before: Vec<f64> = model.param_tensors()[0].data().to_vec();
        let mut adam = Adam::new(spec.optimizer.clone(), &model);
        let grads = model.new_gradients();
        for _ in 0..5 {
            adam.step(&mut model, &grads).unwrap();
        }
        assert_eq!(model.param_tensors()[0].data(), before.as_slice());
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let run = || {
            let (mut model, spec) = one_weight_model();
            let mut adam = Adam::new(spec.optimizer.clone(), &model);
            for k in 0..10 {
                let mut grads = model.new_gradients();
                grads.slots[0] = Tensor::from_vec(&[1, 1], vec![0.1 * (k as f64 - 5.0)]).unwrap();
                grads.slots[1] = Tensor::from_vec(&[1], vec![0.05]).unwrap();
                adam.step(&mut model, &grads).unwrap();
            }
            model.param_tensors()[0].data().to_vec()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn non_finite_gradient_is_rejected() {
        let (mut model, spec) = one_weight_model();
        let mut adam = Adam::new(spec.optimizer.clone(), &model);
        let mut grads = model.new_gradients();
        grads.slots[0] = Tensor::from_vec(&[1, 1], vec![f64::NAN]).unwrap();
        let err = adam.step(&mut model, &grads).unwrap_err();
        assert!(matches!(err, NnError::NonFiniteGradient { .. }));
    }
}
