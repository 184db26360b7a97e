//! Supervised training tuples: overlapping stride-1 windows of an aligned
//! series matrix, each predicting the target column's next value.

use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::nn::Tensor;
use crate::preprocess::Metric;
use crate::spatial::PredictionMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowOrigin {
    pub ap_name: String,
    pub metric: Metric,
    pub mode: PredictionMode,
}

/// P windows of `input_len` rows × F features plus scalar targets.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    /// (P, L, F) tensor of inputs.
    pub inputs: Tensor,
    /// Target column value right after each window.
    pub targets: Vec<f64>,
    pub origin: WindowOrigin,
}

impl WindowSet {
    pub fn count(&self) -> usize {
        self.targets.len()
    }

    pub fn input_len(&self) -> usize {
        self.inputs.shape()[1]
    }

    pub fn features(&self) -> usize {
        self.inputs.shape()[2]
    }

    /// One window as an (L, F) tensor.
    pub fn window(&self, p: usize) -> Tensor {
        let (l, f) = (self.input_len(), self.features());
        let slice = &self.inputs.data()[p * l * f..(p + 1) * l * f];
        Tensor::from_vec(&[l, f], slice.to_vec()).expect("window volume")
    }
}

/// Cuts an N×F matrix (column 0 = target AP) into consecutive overlapping
/// windows: window p covers rows p..p+input_len, its target is the column-0
/// value at row p+input_len.
pub fn make_windows(
    matrix: &Tensor,
    input_len: usize,
    origin: WindowOrigin,
) -> Result<WindowSet, TrainError> {
    if matrix.rank() != 2 {
        return Err(TrainError::BadMatrix {
            shape: matrix.shape().to_vec(),
        });
    }
    let (n, f) = (matrix.rows(), matrix.cols());
    if input_len == 0 || n <= input_len {
        return Err(TrainError::InsufficientData {
            len: n,
            input_len,
        });
    }
    let p_count = n - input_len;
    let mut inputs = Tensor::zeros(&[p_count, input_len, f]);
    let mut targets = Vec::with_capacity(p_count);
    for p in 0..p_count {
        let src = &matrix.data()[p * f..(p + input_len) * f];
        inputs.data_mut()[p * input_len * f..(p + 1) * input_len * f].copy_from_slice(src);
        targets.push(matrix.data()[(p + input_len) * f]);
    }
    Ok(WindowSet {
        inputs,
        targets,
        origin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn six_values_lag_three_gives_three_windows() {
        let ws = make_windows(&column(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]), 3, origin()).unwrap();
        assert_eq!(ws.count(), 3);
        assert_eq!(ws.window(0).data(), &[1.0, 2.0, 3.0]);
        assert_eq!(ws.targets[0], 4.0);
        assert_eq!(ws.window(1).data(), &[2.0, 3.0, 4.0]);
        assert_eq!(ws.targets[1], 5.0);
        assert_eq!(ws.window(2).data(), &[3.0, 4.0, 5.0]);
        assert_eq!(ws.targets[2], 6.0);
    }

    #[test]
    fn boundary_single_window() {
        let ws = make_windows(&column(&[1.0, 2.0, 3.0, 4.0]), 3, origin()).unwrap();
        assert_eq!(ws.count(), 1);
        assert_eq!(ws.targets, vec![4.0]);
    }

    #[test]
    fn too_short_is_error() {
        let err = make_windows(&column(&[1.0, 2.0, 3.0]), 3, origin()).unwrap_err();
        assert!(matches!(err, TrainError::InsufficientData { .. }));
    }

    #[test]
    fn spatio_windows_carry_all_columns() {
        // 8 rows x 6 columns, target column counts by 1
        let mut m = Tensor::zeros(&[8, 6]);
        for r in 0..8 {
            for c in 0..6 {
                m.data_mut()[r * 6 + c] = r as f64 + 100.0 * c as f64;
            }
        }
        let ws = make_windows(&m, 3, origin()).unwrap();
        assert_eq!(ws.count(), 5);
        assert_eq!(ws.window(0).shape(), &[3, 6]);
        assert_eq!(ws.targets[0], 3.0); // column 0 at row 3
        assert_eq!(ws.window(0).row(1)[5], 501.0);
    }

    #[test]
    fn window_count_drops_by_one_per_extra_lag() {
        let values: Vec<f64> = (0..20).map(|v| v as f64).collect();
        for l in 1..10 {
            let ws = make_windows(&column(&values), l, origin()).unwrap();
            assert_eq!(ws.count(), 20 - l);
        }
    }
}
