//! Mini-batch training over a walk-forward plan.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::plan::FoldPlan;
use super::windows::WindowSet;
use super::TrainError;
use crate::nn::model::AdamSpec;
use crate::nn::{mse_loss, Adam, Model, ModelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Stop a refit early after this many epochs without loss improvement.
    pub patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 16,
            epochs: 100,
            learning_rate: 1e-3,
            seed: 0,
            patience: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(TrainError::BadTrainConfig(
                "batch_size and epochs must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::BadTrainConfig(
                "learning_rate must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationPoint {
    pub window_index: usize,
    pub actual: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Filled by the pipeline with the data-preparation share of TCT.
    pub tct_preprocess_seconds: f64,
    pub tct_fit_seconds: f64,
    /// Mean training loss per epoch of the final refit.
    pub loss_curve: Vec<f64>,
    pub validation: Vec<ValidationPoint>,
}

fn stream_seed(base: u64, salt: u64) -> u64 {
    base.wrapping_add(salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn train_once(
    spec: &ModelSpec,
    windows: &WindowSet,
    train_count: usize,
    config: &TrainConfig,
    refit_index: u64,
) -> Result<(Model, Vec<f64>), TrainError> {
    let mut model = Model::new(spec)?;
    let optimizer = AdamSpec {
        learning_rate: config.learning_rate,
        ..spec.optimizer.clone()
    };
    let mut adam = Adam::new(optimizer, &model);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(stream_seed(config.seed, refit_index));
    let mut order: Vec<usize> = (0..train_count).collect();
    let mut grads = model.new_gradients();
    let mut loss_curve = Vec::with_capacity(config.epochs);
    let mut best = f64::INFINITY;
    let mut since_best = 0usize;

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            grads.zero();
            let inv = 1.0 / batch.len() as f64;
            for &idx in batch {
                let input = windows.window(idx);
                let (pred, cache) = model.forward_train(&input)?;
                let (loss, d_loss) = mse_loss(pred, windows.targets[idx]);
                epoch_loss += loss;
                model.backward(&cache, d_loss * inv, &mut grads)?;
            }
            adam.step(&mut model, &grads)?;
        }
        let mean_loss = epoch_loss / train_count as f64;
        if !mean_loss.is_finite() {
            return Err(TrainError::Divergence {
                epoch,
                loss: mean_loss,
            });
        }
        loss_curve.push(mean_loss);
        if let Some(patience) = config.patience {
            if mean_loss + 1e-12 < best {
                best = mean_loss;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= patience {
                    break;
                }
            }
        }
    }
    Ok((model, loss_curve))
}

/// Trains per the plan's refit schedule and predicts every validation
/// window with the most recent model. Returns the last refit's model.
pub fn fit(
    spec: &ModelSpec,
    windows: &WindowSet,
    plan: &FoldPlan,
    config: &TrainConfig,
) -> Result<(Model, TrainReport), TrainError> {
    config.validate()?;
    if plan
        .steps
        .last()
        .map(|s| s.validation_index >= windows.count())
        .unwrap_or(true)
    {
        return Err(TrainError::PlanWindowMismatch {
            plan_windows: plan.steps.last().map(|s| s.validation_index + 1).unwrap_or(0),
            actual: windows.count(),
        });
    }

    let started = Instant::now();
    let mut model: Option<Model> = None;
    let mut loss_curve = Vec::new();
    let mut validation = Vec::with_capacity(plan.steps.len());
    let mut refit_index = 0u64;
    for step in &plan.steps {
        if step.refit || model.is_none() {
            let (m, curve) = train_once(spec, windows, step.train_end, config, refit_index)?;
            model = Some(m);
            loss_curve = curve;
            refit_index += 1;
        }
        let current = model.as_ref().expect("fitted above");
        let input = windows.window(step.validation_index);
        validation.push(ValidationPoint {
            window_index: step.validation_index,
            actual: windows.targets[step.validation_index],
            predicted: current.predict(&input)?,
        });
    }

    Ok((
        model.expect("plan has at least one step"),
        TrainReport {
            tct_preprocess_seconds: 0.0,
            tct_fit_seconds: started.elapsed().as_secs_f64(),
            loss_curve,
            validation,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{build_model, ModelKind, Tensor};
    use crate::preprocess::Metric;
    use crate::spatial::PredictionMode;
    use crate::train::plan::walk_forward_plan;
    use crate::train::windows::{make_windows, WindowOrigin};

    fn origin() -> WindowOrigin {
        WindowOrigin {
            ap_name: "A".into(),
            metric: Metric::TrafficLoad,
            mode: PredictionMode::Temporal,
        }
    }

    fn column(values: &[f64]) -> Tensor {
        Tensor::from_vec(&[values.len(), 1], values.to_vec()).unwrap()
    }

    fn quick_config(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            learning_rate: 5e-3,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn constant_series_is_learned() {
        let values = vec![0.6; 60];
        let windows = make_windows(&column(&values), 4, origin()).unwrap();
        let plan = walk_forward_plan(windows.count(), 0.3, usize::MAX).unwrap();
        let spec = build_model(
            ModelKind::Srnn,
            PredictionMode::Temporal,
            4,
            0,
            5,
            crate::nn::AdamSpec::with_learning_rate(1e-2),
        )
        .unwrap();
        let config = TrainConfig {
            learning_rate: 1e-2,
            ..quick_config(150)
        };
        let (_, report) = fit(&spec, &windows, &plan, &config).unwrap();
        let worst = report
            .validation
            .iter()
            .map(|v| (v.predicted - v.actual).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 0.05, "worst abs error {worst}");
        // dropout noise keeps train-mode loss above the validation error
        assert!(report.loss_curve.last().unwrap() < &5e-2);
    }

    #[test]
    fn fit_is_deterministic() {
        let values: Vec<f64> = (0..50).map(|t| ((t as f64) * 0.4).sin() * 0.5 + 0.5).collect();
        let windows = make_windows(&column(&values), 5, origin()).unwrap();
        let plan = walk_forward_plan(windows.count(), 0.3, 10).unwrap();
        let spec = build_model(
            ModelKind::Gru,
            PredictionMode::Temporal,
            5,
            0,
            7,
            crate::nn::AdamSpec::default(),
        )
        .unwrap();
        let run = || fit(&spec, &windows, &plan, &quick_config(8)).unwrap();
        let (model_a, report_a) = run();
        let (model_b, report_b) = run();
        // bit-identical numerics; only the wall-clock field may differ
        assert_eq!(report_a.loss_curve, report_b.loss_curve);
        assert_eq!(report_a.validation, report_b.validation);
        for (x, y) in model_a.param_tensors().iter().zip(model_b.param_tensors()) {
            assert_eq!(x, &y);
        }
    }

    #[test]
    fn training_loss_decreases_on_learnable_series() {
        let values: Vec<f64> = (0..80).map(|t| ((t as f64) * 0.3).sin() * 0.4 + 0.5).collect();
        let windows = make_windows(&column(&values), 6, origin()).unwrap();
        let plan = walk_forward_plan(windows.count(), 0.3, usize::MAX).unwrap();
        let spec = build_model(
            ModelKind::Lstm,
            PredictionMode::Temporal,
            6,
            0,
            3,
            crate::nn::AdamSpec::default(),
        )
        .unwrap();
        let (_, report) = fit(&spec, &windows, &plan, &quick_config(25)).unwrap();
        assert!(report.loss_curve.last().unwrap() < report.loss_curve.first().unwrap());
    }

    #[test]
    fn noiseless_ar1_reaches_high_r2() {
        // x_{t+1} = a·x_t exactly; the generator's closed form is the oracle
        let a = -0.99f64;
        let mut x = 1.0;
        let values: Vec<f64> = (0..160)
            .map(|_| {
                let v = x;
                x *= a;
                v
            })
            .collect();
        let windows = make_windows(&column(&values), 4, origin()).unwrap();
        let plan = walk_forward_plan(windows.count(), 0.3, usize::MAX).unwrap();
        // dropout-free stack so the noiseless relation is fit cleanly
        let spec = crate::nn::ModelSpec {
            input_shape: (4, 1),
            layers: vec![
                crate::nn::LayerSpec::Recurrent {
                    cell: crate::nn::CellKind::Lstm,
                    units: 16,
                    return_sequences: false,
                },
                crate::nn::LayerSpec::Dense {
                    units: 1,
                    activation: crate::nn::Activation::Linear,
                },
            ],
            optimizer: crate::nn::AdamSpec::with_learning_rate(1e-3),
            seed: 2,
        };
        let config = TrainConfig {
            epochs: 500,
            learning_rate: 1e-3,
            seed: 2,
            // full batch keeps the noiseless loss curve monotone
            batch_size: windows.count(),
            patience: None,
        };
        let (_, report) = fit(&spec, &windows, &plan, &config).unwrap();
        let actual: Vec<f64> = report.validation.iter().map(|v| v.actual).collect();
        let oracle: Vec<f64> = report
            .validation
            .iter()
            .map(|v| values[v.window_index + 3] * a)
            .collect();
        for (lhs, rhs) in actual.iter().zip(&oracle) {
            assert!((lhs - rhs).abs() < 1e-12, "oracle disagrees with targets");
        }
        let predicted: Vec<f64> = report.validation.iter().map(|v| v.predicted).collect();
        let r2 = crate::eval::r2_score(&actual, &predicted).unwrap();
        assert!(r2 > 0.99, "validation R2 {r2}");
    }

    #[test]
    fn noiseless_full_batch_loss_is_monotone() {
        // trivially learnable target, no dropout, full batch: the descent
        // should never step uphill beyond numerical jitter
        let values: Vec<f64> = (0..60).map(|t| 0.4 + 0.2 * ((t % 2) as f64)).collect();
        let windows = make_windows(&column(&values), 4, origin()).unwrap();
        let plan = walk_forward_plan(windows.count(), 0.3, usize::MAX).unwrap();
        let spec = crate::nn::ModelSpec {
            input_shape: (4, 1),
            layers: vec![
                crate::nn::LayerSpec::Recurrent {
                    cell: crate::nn::CellKind::Srnn,
                    units: 8,
                    return_sequences: false,
                },
                crate::nn::LayerSpec::Dense {
                    units: 1,
                    activation: crate::nn::Activation::Linear,
                },
            ],
            optimizer: crate::nn::AdamSpec::with_learning_rate(1e-3),
            seed: 6,
        };
        let config = TrainConfig {
            epochs: 120,
            learning_rate: 1e-3,
            seed: 6,
            batch_size: windows.count(),
            patience: None,
        };
        let (_, report) = fit(&spec, &windows, &plan, &config).unwrap();
        for pair in report.loss_curve.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "loss rose: {} -> {}", pair[0], pair[1]);
        }
        assert!(report.loss_curve.last().unwrap() < report.loss_curve.first().unwrap());
    }

    #[test]
    fn early_stop_honors_patience() {
        let values = vec![0.5; 40];
        let windows = make_windows(&column(&values), 4, origin()).unwrap();
        let plan = walk_forward_plan(windows.count(), 0.3, usize::MAX).unwrap();
        let spec = build_model(
            ModelKind::Srnn,
            PredictionMode::Temporal,
            4,
            0,
            5,
            crate::nn::AdamSpec::default(),
        )
        .unwrap();
        let config = TrainConfig {
            patience: Some(3),
            ..quick_config(500)
        };
        let (_, report) = fit(&spec, &windows, &plan, &config).unwrap();
        assert!(report.loss_curve.len() < 500);
    }
}
