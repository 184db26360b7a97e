//! Pearson correlation over neighbour candidates, high-correlation
//! neighbour selection against a threshold, prediction-mode choice, and
//! assembly of spatio-temporal inputs with zero padding / truncation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::NeighborCandidateList;
use crate::preprocess::MetricSeries;

#[derive(Debug, Error)]
pub enum SpatialError {
    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("series too short for correlation (length {len})")]
    TooShort { len: usize },
    #[error("series {ap} has zero variance")]
    ZeroVariance { ap: String },
    #[error("AP `{ap}` not present in the correlation matrix")]
    UnknownAp { ap: String },
    #[error("window [{start}, {end}) exceeds series length {len}")]
    WindowOutOfRange { start: usize, end: usize, len: usize },
    #[error("neighbor `{ap}` series missing from the provided map")]
    MissingNeighborSeries { ap: String },
}

/// Pairwise correlations over the candidate pairs; non-candidate pairs stay
/// unset.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub ap_order: Vec<String>,
    /// Row-major `ap_order.len()²` entries; `None` marks pairs that were not
    /// candidates (or involve a constant series).
    pub entries: Vec<Option<f64>>,
    pub warnings: Vec<String>,
}

impl CorrelationMatrix {
    pub fn index_of(&self, ap: &str) -> Option<usize> {
        self.ap_order.iter().position(|a| a == ap)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries[i * self.ap_order.len() + j]
    }

    fn set(&mut self, i: usize, j: usize, v: Option<f64>) {
        let n = self.ap_order.len();
        self.entries[i * n + j] = v;
        self.entries[j * n + i] = v;
    }

    /// CSV rendering with AP names as header row and column; unset pairs
    /// are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("ap");
        for ap in &self.ap_order {
            out.push(',');
            out.push_str(ap);
        }
        out.push('\n');
        for (i, ap) in self.ap_order.iter().enumerate() {
            out.push_str(ap);
            for j in 0..self.ap_order.len() {
                out.push(',');
                if let Some(v) = self.get(i, j) {
                    out.push_str(&format!("{v:.6}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// High-correlation neighbours of one AP, ordered by correlation descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborSet {
    pub target: String,
    /// (neighbor, correlation), correlation strictly above `threshold`,
    /// descending; ties broken by AP name.
    pub neighbors: Vec<(String, f64)>,
    pub threshold: f64,
    /// Count before truncation to `m_max` (the paper's M_i).
    pub m_count: usize,
    /// Maximum neighbours fed to a model (the paper's M).
    pub m_max: usize,
}

impl NeighborSet {
    /// Neighbours actually used for assembly: the top `m_max` by correlation.
    pub fn truncated(&self) -> &[(String, f64)] {
        &self.neighbors[..self.m_count.min(self.m_max)]
    }

    pub fn mode(&self) -> PredictionMode {
        if self.m_count == 0 {
            PredictionMode::Temporal
        } else {
            PredictionMode::SpatioTemporal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionMode {
    Temporal,
    SpatioTemporal,
}

impl std::fmt::Display for PredictionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PredictionMode::Temporal => "temporal",
            PredictionMode::SpatioTemporal => "spatio-temporal",
        })
    }
}

/// Sample Pearson coefficient of two equally long, non-constant sequences.
///
/// The result is clamped to [-1, 1] only to absorb final rounding.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, SpatialError> {
    if x.len() != y.len() {
        return Err(SpatialError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(SpatialError::TooShort { len: n });
    }
    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x <= 0.0 {
        return Err(SpatialError::ZeroVariance { ap: "x".into() });
    }
    if var_y <= 0.0 {
        return Err(SpatialError::ZeroVariance { ap: "y".into() });
    }
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation over every candidate pair of aligned, same-metric series.
///
/// Each unordered pair is computed once; a constant series marks all of its
/// pairs unset with a warning instead of failing the build.
pub fn build_correlation_matrix(
    dataset: &BTreeMap<String, MetricSeries>,
    candidates: &NeighborCandidateList,
) -> Result<CorrelationMatrix, SpatialError> {
    let ap_order: Vec<String> = dataset.keys().cloned().collect();
    let n = ap_order.len();
    let len0 = dataset.values().next().map(|s| s.len()).unwrap_or(0);
    for s in dataset.values() {
        if s.len() != len0 {
            return Err(SpatialError::LengthMismatch {
                left: len0,
                right: s.len(),
            });
        }
    }

    let mut matrix = CorrelationMatrix {
        ap_order: ap_order.clone(),
        entries: vec![None; n * n],
        warnings: Vec::new(),
    };
    for i in 0..n {
        matrix.set(i, i, Some(1.0));
    }
    for (i, ap) in ap_order.iter().enumerate() {
        for cand in candidates.candidates_of(ap) {
            let Some(j) = matrix.index_of(cand) else { continue };
            if j <= i || matrix.get(i, j).is_some() {
                continue; // unordered pair already handled
            }
            match pearson(&dataset[ap].values, &dataset[cand].values) {
                Ok(c) => matrix.set(i, j, Some(c)),
                Err(SpatialError::ZeroVariance { .. }) => {
                    matrix
                        .warnings
                        .push(format!("constant series in pair ({ap}, {cand}); entry left unset"));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(matrix)
}

/// Neighbours of `target` with correlation strictly above `threshold`,
/// sorted descending (ties by name). Truncation to the top `m_max` happens
/// at assembly; `m_count` keeps the pre-truncation count.
pub fn select_high_corr(
    matrix: &CorrelationMatrix,
    target: &str,
    threshold: f64,
    m_max: usize,
) -> Result<NeighborSet, SpatialError> {
    let i = matrix.index_of(target).ok_or_else(|| SpatialError::UnknownAp {
        ap: target.to_string(),
    })?;
    let mut neighbors: Vec<(String, f64)> = matrix
        .ap_order
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .filter_map(|(j, ap)| matrix.get(i, j).map(|c| (ap.clone(), c)))
        .filter(|(_, c)| *c > threshold)
        .collect();
    neighbors.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    Ok(NeighborSet {
        target: target.to_string(),
        m_count: neighbors.len(),
        neighbors,
        threshold,
        m_max,
    })
}

/// Temporal when no highly correlated neighbour exists, spatio-temporal
/// otherwise.
pub fn choose_mode(neighbor_set: &NeighborSet) -> PredictionMode {
    neighbor_set.mode()
}

/// Stacks the target and its neighbours into an aligned N×(m_max+1) matrix:
/// column 0 is the target, columns 1.. are the top neighbours by
/// correlation, and any remaining columns are zero filled.
///
/// Returned as (row-major values, columns). Windows are row slices of this.
pub fn assemble_matrix(
    target: &MetricSeries,
    neighbors: &NeighborSet,
    series: &BTreeMap<String, MetricSeries>,
    m_max: usize,
) -> Result<(Vec<f64>, usize), SpatialError> {
    let n = target.len();
    let cols = m_max + 1;
    let used = neighbors.truncated();
    let mut col_series: Vec<&[f64]> = Vec::with_capacity(used.len());
    for (ap, _) in used {
        let s = series
            .get(ap)
            .ok_or_else(|| SpatialError::MissingNeighborSeries { ap: ap.clone() })?;
        if s.len() != n {
            return Err(SpatialError::LengthMismatch {
                left: n,
                right: s.len(),
            });
        }
        col_series.push(&s.values);
    }
    let mut out = vec![0.0; n * cols];
    for r in 0..n {
        out[r * cols] = target.values[r];
        for (k, cs) in col_series.iter().enumerate() {
            out[r * cols + k + 1] = cs[r];
        }
    }
    Ok((out, cols))
}

/// One L×(m_max+1) input window starting at `start` (row-major).
///
/// Passing `m_max = 0` yields the temporal L×1 column of the target alone.
pub fn assemble_window(
    target: &MetricSeries,
    neighbors: &NeighborSet,
    series: &BTreeMap<String, MetricSeries>,
    start: usize,
    window: usize,
    m_max: usize,
) -> Result<Vec<f64>, SpatialError> {
    if start + window > target.len() {
        return Err(SpatialError::WindowOutOfRange {
            start,
            end: start + window,
            len: target.len(),
        });
    }
    let (matrix, cols) = assemble_matrix(target, neighbors, series, m_max)?;
    Ok(matrix[start * cols..(start + window) * cols].to_vec())
}
