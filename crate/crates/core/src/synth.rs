//! Synthetic AP counter traces with controllable spatial coupling, used to
//! verify the pipeline end to end when no real export is at hand.
//!
//! Each AP's traffic is a positive daily profile modulated by a latent
//! AR(1) factor shared within its coupling group plus idiosyncratic noise;
//! failures follow a second shared latent. Pairwise loadings in [0, 1]
//! control how much of the variance the shared factor explains, so the
//! measured Pearson correlation rises monotonically with the configured
//! coupling.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::MEASUREMENT_HEADER;
use crate::preprocess::{is_weekend, GridConfig};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub ap_count: usize,
    pub day_count: usize,
    pub start_date: NaiveDate,
    /// Peak scale of the daily profile, in packets per period.
    pub amplitude: f64,
    /// Phase offset of the daily sinusoid, in radians.
    pub phase: f64,
    /// Baseline fraction of the profile (keeps off-peak traffic positive).
    pub profile_base: f64,
    /// Sinusoidal swing of the profile.
    pub profile_swing: f64,
    /// Symmetric pairwise latent-factor loadings with unit diagonal.
    pub coupling: Vec<Vec<f64>>,
    /// AR(1) coefficient of the shared latents.
    pub ar_coeff: f64,
    /// Stationary standard deviation of the shared latents.
    pub latent_sd: f64,
    /// Standard deviation of per-AP multiplicative noise.
    pub noise_std: f64,
    /// Probability that a slot's row is missing from the export.
    pub missing_prob: f64,
    /// Baseline failure fraction of transmitted packets.
    pub failure_base: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// All pairs share the same coupling strength.
    pub fn uniform(ap_count: usize, day_count: usize, coupling: f64, seed: u64) -> SyntheticSpec {
        let matrix = (0..ap_count)
            .map(|i| {
                (0..ap_count)
                    .map(|j| if i == j { 1.0 } else { coupling })
                    .collect()
            })
            .collect();
        SyntheticSpec {
            ap_count,
            day_count,
            start_date: NaiveDate::from_ymd_opt(2019, 9, 9).unwrap(),
            amplitude: 1000.0,
            phase: 0.0,
            profile_base: 0.3,
            profile_swing: 0.7,
            coupling: matrix,
            ar_coeff: 0.9,
            latent_sd: std::f64::consts::SQRT_2,
            noise_std: 0.95,
            missing_prob: 0.01,
            failure_base: 0.08,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.ap_count == 0 || self.day_count == 0 {
            return Err(SynthError::Invalid("ap_count and day_count must be positive".into()));
        }
        if self.coupling.len() != self.ap_count
            || self.coupling.iter().any(|row| row.len() != self.ap_count)
        {
            return Err(SynthError::Invalid(format!(
                "coupling matrix must be {0}x{0}",
                self.ap_count
            )));
        }
        for i in 0..self.ap_count {
            if (self.coupling[i][i] - 1.0).abs() > 1e-12 {
                return Err(SynthError::Invalid("coupling diagonal must be 1".into()));
            }
            for j in 0..self.ap_count {
                let c = self.coupling[i][j];
                if !(0.0..=1.0).contains(&c) {
                    return Err(SynthError::Invalid(format!(
                        "coupling[{i}][{j}] = {c} outside [0, 1]"
                    )));
                }
                if (c - self.coupling[j][i]).abs() > 1e-12 {
                    return Err(SynthError::Invalid("coupling must be symmetric".into()));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.missing_prob) {
            return Err(SynthError::Invalid("missing_prob outside [0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.ar_coeff.abs()) {
            return Err(SynthError::Invalid("|ar_coeff| must be below 1".into()));
        }
        if self.amplitude <= 0.0 || self.latent_sd < 0.0 || self.noise_std < 0.0 {
            return Err(SynthError::Invalid("scales must be non-negative".into()));
        }
        if !(0.0..0.5).contains(&self.failure_base) {
            return Err(SynthError::Invalid("failure_base outside [0, 0.5)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticOutput {
    /// Measurement export in the ingest format.
    pub measurements_csv: String,
    /// Ground-truth coupling matrix, AP names as header row/column.
    pub coupling_csv: String,
    pub ap_names: Vec<String>,
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn stream(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(salt.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Connected components of the coupling graph (edges where c > 0).
fn coupling_components(matrix: &[Vec<f64>]) -> Vec<usize> {
    let n = matrix.len();
    let mut component = vec![usize::MAX; n];
    let mut next = 0usize;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        component[start] = next;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if i != j && matrix[i][j] > 0.0 && component[j] == usize::MAX {
                    component[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    component
}

fn ar1_path(len: usize, coeff: f64, sd: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let innovation_sd = sd * (1.0 - coeff * coeff).sqrt();
    let mut path = Vec::with_capacity(len);
    let mut state = sd * standard_normal(rng); // stationary start
    for _ in 0..len {
        path.push(state);
        state = coeff * state + innovation_sd * standard_normal(rng);
    }
    path
}

/// Generates a raw measurement file (and the ground-truth coupling
/// sidecar) on the given grid, weekdays only.
pub fn generate_synthetic(
    spec: &SyntheticSpec,
    grid: &GridConfig,
) -> Result<SyntheticOutput, SynthError> {
    spec.validate()?;
    grid.validate()
        .map_err(|e| SynthError::Invalid(e.to_string()))?;
    let slots = grid.periods_per_day();
    let total = spec.day_count * slots;

    let ap_names: Vec<String> = (0..spec.ap_count).map(|i| format!("AP{:03}", i + 1)).collect();
    let days: Vec<NaiveDate> = spec
        .start_date
        .iter_days()
        .filter(|d| !is_weekend(*d))
        .take(spec.day_count)
        .collect();

    let component = coupling_components(&spec.coupling);
    let component_count = component.iter().copied().max().unwrap_or(0) + 1;
    let traffic_latents: Vec<Vec<f64>> = (0..component_count)
        .map(|k| ar1_path(total, spec.ar_coeff, spec.latent_sd, &mut stream(spec.seed, 1_000 + k as u64)))
        .collect();
    let failure_latents: Vec<Vec<f64>> = (0..component_count)
        .map(|k| ar1_path(total, spec.ar_coeff, spec.latent_sd, &mut stream(spec.seed, 2_000 + k as u64)))
        .collect();

    // per-AP loading: uniform blocks reproduce the pairwise coupling exactly
    // (λ_i λ_j = c); mixed blocks get the mean of their incident loadings
    let loadings: Vec<f64> = (0..spec.ap_count)
        .map(|i| {
            let peers: Vec<f64> = (0..spec.ap_count)
                .filter(|j| *j != i && component[*j] == component[i] && spec.coupling[i][*j] > 0.0)
                .map(|j| spec.coupling[i][j])
                .collect();
            if peers.is_empty() {
                0.0
            } else {
                (peers.iter().sum::<f64>() / peers.len() as f64).sqrt()
            }
        })
        .collect();

    let profile: Vec<f64> = (0..slots)
        .map(|s| {
            let angle = std::f64::consts::PI * s as f64 / (slots.max(2) - 1) as f64 + spec.phase;
            (spec.profile_base + spec.profile_swing * angle.sin()).max(0.05) * spec.amplitude
        })
        .collect();

    // one independent stream per AP so records never depend on AP order
    struct ApTrace {
        tx: Vec<u64>,
        failed: Vec<u64>,
        success: Vec<u64>,
        success_re: Vec<u64>,
        present: Vec<bool>,
    }
    let traces: Vec<ApTrace> = (0..spec.ap_count)
        .map(|i| {
            let mut rng = stream(spec.seed, 10 + i as u64);
            let u = &traffic_latents[component[i]];
            let v = &failure_latents[component[i]];
            let lambda = loadings[i];
            let mut trace = ApTrace {
                tx: Vec::with_capacity(total),
                failed: Vec::with_capacity(total),
                success: Vec::with_capacity(total),
                success_re: Vec::with_capacity(total),
                present: Vec::with_capacity(total),
            };
            for n in 0..total {
                let s = profile[n % slots];
                let noise = spec.noise_std * standard_normal(&mut rng);
                let tx = (s * (1.0 + lambda * u[n] + noise).max(0.0)).round() as u64;
                let fail_noise = spec.noise_std * standard_normal(&mut rng);
                let frac = (spec.failure_base * (1.0 + lambda * v[n] + fail_noise))
                    .clamp(0.0, 0.85);
                let failed = ((tx as f64) * frac).round() as u64;
                let delivered = tx - failed;
                let success_re = ((delivered as f64) * 0.15).round() as u64;
                trace.tx.push(tx);
                trace.failed.push(failed);
                trace.success.push(delivered - success_re);
                trace.success_re.push(success_re);
                trace.present.push(rng.gen::<f64>() >= spec.missing_prob);
            }
            trace
        })
        .collect();

    let mut csv = String::from(MEASUREMENT_HEADER);
    csv.push('\n');
    for (d, date) in days.iter().enumerate() {
        for s in 0..slots {
            let n = d * slots + s;
            let time = grid.slot_time(s);
            for (i, ap) in ap_names.iter().enumerate() {
                let t = &traces[i];
                if !t.present[n] {
                    continue;
                }
                csv.push_str(&format!(
                    "{}T{},{},2.4GHz,{},{},{},{}\n",
                    date.format("%Y-%m-%d"),
                    time.format("%H:%M"),
                    ap,
                    t.tx[n],
                    t.success[n],
                    t.success_re[n],
                    t.failed[n],
                ));
            }
        }
    }

    let mut coupling_csv = String::from("ap");
    for ap in &ap_names {
        coupling_csv.push(',');
        coupling_csv.push_str(ap);
    }
    coupling_csv.push('\n');
    for (i, ap) in ap_names.iter().enumerate() {
        coupling_csv.push_str(ap);
        for j in 0..spec.ap_count {
            coupling_csv.push_str(&format!(",{:.4}", spec.coupling[i][j]));
        }
        coupling_csv.push('\n');
    }

    Ok(SyntheticOutput {
        measurements_csv: csv,
        coupling_csv,
        ap_names,
    })
}
