//! Augmented Dickey-Fuller statistic and the lag-selection rules used to
//! size model input windows.
//!
//! The ADF regression is Δy_t on an intercept, y_{t-1} and the lagged
//! differences Δy_{t-1}..Δy_{t-lag}; the statistic is the t-value of the
//! y_{t-1} coefficient. The input lag is chosen as the argmin of that
//! statistic over 1..=max_lag, per-AP lags are reduced to their mode, and
//! the columns of a spatio-temporal input share the maximum of their lags.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatLagError {
    #[error("design matrix is rank deficient (column {column})")]
    SingularDesign { column: usize },
    #[error("design needs at least as many rows as columns ({rows} rows, {cols} cols)")]
    UnderDetermined { rows: usize, cols: usize },
    #[error("series is constant; ADF statistic undefined")]
    DegenerateSeries,
    #[error("series of {len} points is too short for lag {lag} (need {needed})")]
    InsufficientData { len: usize, lag: usize, needed: usize },
    #[error("lag must be at least 1")]
    ZeroLag,
    #[error("empty input")]
    EmptyInput,
}

/// Ordinary least squares fit of `response` on the rows of `design`.
#[derive(Debug, Clone)]
pub struct LeastSquaresFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub residual_sum_of_squares: f64,
    pub observations: usize,
}

/// Solves min ‖Xβ − y‖² by Householder QR; standard errors come from the
/// residual variance and the diagonal of (XᵀX)⁻¹ = R⁻¹R⁻ᵀ.
pub fn least_squares(design: &[Vec<f64>], response: &[f64]) -> Result<LeastSquaresFit, StatLagError> {
    let rows = design.len();
    if rows == 0 || response.len() != rows {
        return Err(StatLagError::EmptyInput);
    }
    let cols = design[0].len();
    if cols == 0 || rows < cols {
        return Err(StatLagError::UnderDetermined { rows, cols });
    }

    // column-major working copy
    let mut a = vec![0.0f64; rows * cols];
    for (r, row) in design.iter().enumerate() {
        for c in 0..cols {
            a[c * rows + r] = row[c];
        }
    }
    let mut y = response.to_vec();

    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let tol = scale * (rows as f64) * f64::EPSILON * 16.0;

    // Householder triangularization, reflectors applied to y as we go
    for j in 0..cols {
        let col = &a[j * rows..(j + 1) * rows];
        let norm = col[j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= tol {
            return Err(StatLagError::SingularDesign { column: j });
        }
        let alpha = if col[j] >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; rows - j];
        v[0] = col[j] - alpha;
        v[1..].copy_from_slice(&col[j + 1..]);
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 <= f64::MIN_POSITIVE {
            // column already triangular below the diagonal
            continue;
        }
        a[j * rows + j] = alpha;
        for r in j + 1..rows {
            a[j * rows + r] = 0.0;
        }
        for c in j + 1..cols {
            let colc = &mut a[c * rows..(c + 1) * rows];
            let dot: f64 = v.iter().zip(&colc[j..]).map(|(vi, xi)| vi * xi).sum();
            let f = 2.0 * dot / vnorm2;
            for (vi, xi) in v.iter().zip(colc[j..].iter_mut()) {
                *xi -= f * vi;
            }
        }
        let dot: f64 = v.iter().zip(&y[j..]).map(|(vi, xi)| vi * xi).sum();
        let f = 2.0 * dot / vnorm2;
        for (vi, xi) in v.iter().zip(y[j..].iter_mut()) {
            *xi -= f * vi;
        }
    }

    for j in 0..cols {
        if a[j * rows + j].abs() <= tol {
            return Err(StatLagError::SingularDesign { column: j });
        }
    }

    // back substitution: R β = (Qᵀy)[..cols]
    let mut beta = vec![0.0; cols];
    for i in (0..cols).rev() {
        let mut s = y[i];
        for j in i + 1..cols {
            s -= a[j * rows + i] * beta[j];
        }
        beta[i] = s / a[i * rows + i];
    }

    let rss: f64 = y[cols..].iter().map(|v| v * v).sum();
    let dof = rows - cols;
    let sigma2 = if dof > 0 { rss / dof as f64 } else { 0.0 };

    // columns of R⁻¹ via back substitution; diag((XᵀX)⁻¹) = R⁻¹R⁻ᵀ
    // diagonal, i.e. the squared row sums of R⁻¹
    let mut rinv = vec![0.0; cols * cols]; // column-major
    for i in 0..cols {
        let mut e = vec![0.0; cols];
        e[i] = 1.0;
        let col = &mut rinv[i * cols..(i + 1) * cols];
        for r in (0..cols).rev() {
            let mut s = e[r];
            for j in r + 1..cols {
                s -= a[j * rows + r] * col[j];
            }
            col[r] = s / a[r * rows + r];
        }
    }
    let mut std_errors = vec![0.0; cols];
    for (i, se) in std_errors.iter_mut().enumerate() {
        let row_sq: f64 = (0..cols).map(|j| rinv[j * cols + i].powi(2)).sum();
        *se = (sigma2 * row_sq).sqrt();
    }

    Ok(LeastSquaresFit {
        coefficients: beta,
        std_errors,
        residual_sum_of_squares: rss,
        observations: rows,
    })
}

/// Outcome of the ADF regression at a fixed lag.
#[derive(Debug, Clone, Copy)]
pub struct AdfResult {
    pub lag: usize,
    /// t-value of the lagged-level coefficient.
    pub statistic: f64,
    /// Coefficient on y_{t-1}.
    pub beta: f64,
    /// Akaike information criterion of the regression.
    pub aic: f64,
}

fn adf_fit(series: &[f64], lag: usize) -> Result<LeastSquaresFit, StatLagError> {
    if lag == 0 {
        return Err(StatLagError::ZeroLag);
    }
    let n = series.len();
    let needed = 2 * lag + 4;
    if n < needed {
        return Err(StatLagError::InsufficientData { len: n, lag, needed });
    }
    let (min, max) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if max - min <= 0.0 {
        return Err(StatLagError::DegenerateSeries);
    }

    let cols = lag + 2;
    let mut design = Vec::with_capacity(n - 1 - lag);
    let mut response = Vec::with_capacity(n - 1 - lag);
    for t in lag + 1..n {
        let mut row = Vec::with_capacity(cols);
        row.push(1.0);
        row.push(series[t - 1]);
        for i in 1..=lag {
            row.push(series[t - i] - series[t - i - 1]);
        }
        design.push(row);
        response.push(series[t] - series[t - 1]);
    }
    least_squares(&design, &response)
}

/// ADF statistic at a fixed lag.
pub fn adf_statistic(series: &[f64], lag: usize) -> Result<AdfResult, StatLagError> {
    let fit = adf_fit(series, lag)?;
    let obs = fit.observations as f64;
    let rss = fit.residual_sum_of_squares.max(f64::MIN_POSITIVE);
    Ok(AdfResult {
        lag,
        statistic: fit.coefficients[1] / fit.std_errors[1],
        beta: fit.coefficients[1],
        aic: obs * (rss / obs).ln() + 2.0 * (lag as f64 + 2.0),
    })
}

/// Criterion minimized over candidate lags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagCriterion {
    /// The test statistic itself.
    Statistic,
    /// Akaike information criterion of the ADF regression.
    Aic,
}

/// Index of the smallest value; earlier index wins ties.
fn argmin_smallest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Lag in 1..=max_lag minimizing the ADF statistic (ties toward smaller lag).
pub fn select_lag(series: &[f64], max_lag: usize) -> Result<usize, StatLagError> {
    select_lag_with(series, max_lag, LagCriterion::Statistic)
}

pub fn select_lag_with(
    series: &[f64],
    max_lag: usize,
    criterion: LagCriterion,
) -> Result<usize, StatLagError> {
    if max_lag == 0 {
        return Err(StatLagError::ZeroLag);
    }
    let mut scores = Vec::with_capacity(max_lag);
    for lag in 1..=max_lag {
        let res = adf_statistic(series, lag)?;
        scores.push(match criterion {
            LagCriterion::Statistic => res.statistic,
            LagCriterion::Aic => res.aic,
        });
    }
    Ok(argmin_smallest(&scores) + 1)
}

/// Largest lag usable on a series of length `len` (caps a configured scan).
pub fn max_feasible_lag(len: usize) -> usize {
    len.saturating_sub(4) / 2
}

/// Statistical mode of per-AP lags; ties toward the smallest value.
pub fn consensus_lag(per_ap_lags: &[usize]) -> Result<usize, StatLagError> {
    if per_ap_lags.is_empty() {
        return Err(StatLagError::EmptyInput);
    }
    let mut counts = std::collections::BTreeMap::new();
    for &lag in per_ap_lags {
        *counts.entry(lag).or_insert(0usize) += 1;
    }
    // BTreeMap iterates keys ascending, so `>` keeps the smallest mode
    let mut best = (0usize, 0usize);
    for (lag, count) in counts {
        if count > best.1 {
            best = (lag, count);
        }
    }
    Ok(best.0)
}

/// Shared lag for a multi-column input: the maximum over column lags.
pub fn combined_lag(column_lags: &[usize]) -> Result<usize, StatLagError> {
    column_lags
        .iter()
        .copied()
        .max()
        .ok_or(StatLagError::EmptyInput)
}

/// Per-dataset outcome of the lag-selection pass.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct LagSelection {
    pub per_ap: std::collections::BTreeMap<String, usize>,
    pub consensus: usize,
}

impl LagSelection {
    pub fn from_per_ap(
        per_ap: std::collections::BTreeMap<String, usize>,
    ) -> Result<Self, StatLagError> {
        let lags: Vec<usize> = per_ap.values().copied().collect();
        Ok(LagSelection {
            consensus: consensus_lag(&lags)?,
            per_ap,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn white_noise(n: usize, seed: u64) -> Vec<f64> {
        // Box-Muller on a seeded stream
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect()
    }

    #[test]
    fn least_squares_exact_line() {
        let fit = least_squares(
            &[vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]],
            &[1.0, 3.0, 5.0],
        )
        .unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(fit.residual_sum_of_squares < 1e-20);
    }

    #[test]
    fn least_squares_constant_fit() {
        let fit = least_squares(&[vec![1.0], vec![1.0], vec![1.0]], &[4.0, 4.0, 4.0]).unwrap();
        assert!((fit.coefficients[0] - 4.0).abs() < 1e-12);
        assert!(fit.residual_sum_of_squares < 1e-24);
    }

    #[test]
    fn least_squares_duplicated_column_is_singular() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![1.0, i as f64, i as f64]).collect();
        let y: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let err = least_squares(&rows, &y).unwrap_err();
        assert!(matches!(err, StatLagError::SingularDesign { .. }));
    }

    #[test]
    fn least_squares_known_std_errors() {
        // y = x + noise pattern with exact hand-checkable RSS
        let design: Vec<Vec<f64>> = (0..4).map(|i| vec![1.0, i as f64]).collect();
        let y = [0.0, 1.1, 1.9, 3.0];
        let fit = least_squares(&design, &y).unwrap();
        // Sxy/Sxx = 4.9/5
        assert!((fit.coefficients[1] - 0.98).abs() < 1e-10);
        assert!(fit.std_errors.iter().all(|s| s.is_finite() && *s > 0.0));
    }

    #[test]
    fn adf_white_noise_is_strongly_negative() {
        let series = white_noise(500, 7);
        let res = adf_statistic(&series, 1).unwrap();
        assert!(res.statistic < -5.0, "statistic {}", res.statistic);
    }

    #[test]
    fn adf_random_walk_exceeds_white_noise() {
        let noise = white_noise(500, 7);
        let walk: Vec<f64> = noise
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect();
        let s_noise = adf_statistic(&noise, 1).unwrap().statistic;
        let s_walk = adf_statistic(&walk, 1).unwrap().statistic;
        assert!(s_walk > s_noise, "walk {s_walk} vs noise {s_noise}");
    }

    #[test]
    fn adf_constant_series_is_degenerate() {
        let err = adf_statistic(&[3.0; 50], 1).unwrap_err();
        assert!(matches!(err, StatLagError::DegenerateSeries));
    }

    #[test]
    fn adf_too_short_is_insufficient() {
        let err = adf_statistic(&[1.0, 2.0, 1.5, 2.5], 3).unwrap_err();
        assert!(matches!(err, StatLagError::InsufficientData { .. }));
    }

    #[test]
    fn adf_shift_invariant() {
        let series = white_noise(300, 11);
        let shifted: Vec<f64> = series.iter().map(|v| v + 1000.0).collect();
        for lag in [1, 3, 7] {
            let a = adf_statistic(&series, lag).unwrap().statistic;
            let b = adf_statistic(&shifted, lag).unwrap().statistic;
            assert!((a - b).abs() < 1e-8, "lag {lag}: {a} vs {b}");
        }
    }

    #[test]
    fn adf_scale_invariant() {
        let series = white_noise(300, 13);
        let scaled: Vec<f64> = series.iter().map(|v| v * 3.5e4).collect();
        for lag in [1, 5] {
            let a = adf_statistic(&series, lag).unwrap().statistic;
            let b = adf_statistic(&scaled, lag).unwrap().statistic;
            assert!((a - b).abs() < 1e-8, "lag {lag}: {a} vs {b}");
        }
    }

    #[test]
    fn select_lag_matches_exhaustive_argmin() {
        // weekly-ish pattern plus noise; oracle recomputes every statistic
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let series: Vec<f64> = (0..400)
            .map(|t| (t as f64 * std::f64::consts::TAU / 7.0).sin() + 0.3 * rng.gen::<f64>())
            .collect();
        let max_lag = 12;
        let picked = select_lag(&series, max_lag).unwrap();
        let stats: Vec<f64> = (1..=max_lag)
            .map(|l| adf_statistic(&series, l).unwrap().statistic)
            .collect();
        let mut oracle = 1;
        for lag in 1..=max_lag {
            if stats[lag - 1] < stats[oracle - 1] {
                oracle = lag;
            }
        }
        assert_eq!(picked, oracle);
    }

    #[test]
    fn select_lag_single_candidate() {
        let series = white_noise(100, 3);
        assert_eq!(select_lag(&series, 1).unwrap(), 1);
    }

    #[test]
    fn select_lag_result_is_smallest_minimizer() {
        let series = white_noise(350, 17);
        let picked = select_lag(&series, 10).unwrap();
        let picked_stat = adf_statistic(&series, picked).unwrap().statistic;
        for lag in 1..picked {
            let s = adf_statistic(&series, lag).unwrap().statistic;
            assert!(s > picked_stat, "lag {lag} stat {s} not above {picked_stat}");
        }
    }

    #[test]
    fn argmin_ties_break_to_first() {
        assert_eq!(argmin_smallest(&[3.0, 1.0, 1.0, 2.0]), 1);
        assert_eq!(argmin_smallest(&[5.0]), 0);
    }

    #[test]
    fn aic_criterion_is_available() {
        let series = white_noise(300, 23);
        let lag = select_lag_with(&series, 8, LagCriterion::Aic).unwrap();
        assert!((1..=8).contains(&lag));
    }

    #[test]
    fn consensus_is_mode_with_low_tie_break() {
        assert_eq!(consensus_lag(&[25, 25, 27]).unwrap(), 25);
        assert_eq!(consensus_lag(&[25, 27]).unwrap(), 25);
        assert_eq!(consensus_lag(&[27, 27, 27]).unwrap(), 27);
        assert!(matches!(consensus_lag(&[]), Err(StatLagError::EmptyInput)));
    }

    #[test]
    fn combined_lag_is_max() {
        assert_eq!(combined_lag(&[25, 27, 25, 25, 25]).unwrap(), 27);
        assert_eq!(combined_lag(&[5]).unwrap(), 5);
        assert_eq!(combined_lag(&[3, 3, 3]).unwrap(), 3);
        assert!(matches!(combined_lag(&[]), Err(StatLagError::EmptyInput)));
    }
}
