//! Recurrent layers (SRNN, LSTM, GRU) with backpropagation through time.
//!
//! Input is an (L, in_dim) sequence processed step by step; the layer emits
//! either the full hidden sequence (L, units) or only the final hidden
//! state (units). Gate weights are packed row-blocks of one matrix pair:
//! `wx` maps the step input, `wh` the previous hidden state.
//!
//! Gate packing: LSTM rows are [input, forget, candidate, output] gates,
//! GRU rows are [update, reset, candidate].

use serde::{Deserialize, Serialize};

use super::activation::sigmoid;
use super::linalg::{matvec_add, matvec_t_add, outer_add};
use super::tensor::Tensor;
use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Srnn,
    Lstm,
    Gru,
}

impl CellKind {
    pub fn gate_count(self) -> usize {
        match self {
            CellKind::Srnn => 1,
            CellKind::Lstm => 4,
            CellKind::Gru => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Recurrent {
    pub cell: CellKind,
    pub units: usize,
    pub in_dim: usize,
    pub return_sequences: bool,
    pub wx: Tensor, // (gates*units, in_dim)
    pub wh: Tensor, // (gates*units, units)
    pub b: Tensor,  // (gates*units)
}

/// One step's outputs; `cell_state` only for LSTM.
#[derive(Debug, Clone)]
pub struct CellOutput {
    pub hidden: Vec<f64>,
    pub cell_state: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RecurrentCache {
    input: Tensor,
    /// Hidden states h_1..h_L, row per step.
    h: Vec<f64>,
    /// Post-activation gate values per step (layout depends on the cell).
    gates: Vec<f64>,
    /// LSTM cell states per step.
    c: Vec<f64>,
    /// LSTM tanh(c_t) per step.
    tanh_c: Vec<f64>,
    /// GRU r ⊙ h_prev per step.
    rh: Vec<f64>,
}

impl Recurrent {
    fn check_input(&self, x: &Tensor) -> Result<(), NnError> {
        if x.rank() != 2 || x.cols() != self.in_dim || x.rows() == 0 {
            return Err(NnError::ShapeMismatch {
                context: "recurrent input",
                expected: vec![1, self.in_dim],
                found: x.shape().to_vec(),
            });
        }
        Ok(())
    }

    /// Single cell application (used by the unrolled forward pass).
    ///
    /// `c_prev` is required for LSTM and ignored otherwise.
    pub fn cell_forward(
        &self,
        x: &[f64],
        h_prev: &[f64],
        c_prev: Option<&[f64]>,
    ) -> Result<CellOutput, NnError> {
        if x.len() != self.in_dim || h_prev.len() != self.units {
            return Err(NnError::ShapeMismatch {
                context: "recurrent cell input",
                expected: vec![self.in_dim, self.units],
                found: vec![x.len(), h_prev.len()],
            });
        }
        let u = self.units;
        match self.cell {
            CellKind::Srnn => {
                let mut a = self.b.data().to_vec();
                matvec_add(self.wx.data(), u, self.in_dim, x, &mut a);
                matvec_add(self.wh.data(), u, u, h_prev, &mut a);
                Ok(CellOutput {
                    hidden: a.iter().map(|v| v.tanh()).collect(),
                    cell_state: None,
                })
            }
            CellKind::Lstm => {
                let c_prev = c_prev.ok_or(NnError::ShapeMismatch {
                    context: "lstm cell state",
                    expected: vec![u],
                    found: vec![0],
                })?;
                let mut a = self.b.data().to_vec();
                matvec_add(self.wx.data(), 4 * u, self.in_dim, x, &mut a);
                matvec_add(self.wh.data(), 4 * u, u, h_prev, &mut a);
                let mut h = vec![0.0; u];
                let mut c = vec![0.0; u];
                for k in 0..u {
                    let i = sigmoid(a[k]);
                    let f = sigmoid(a[u + k]);
                    let g = a[2 * u + k].tanh();
                    let o = sigmoid(a[3 * u + k]);
                    c[k] = f * c_prev[k] + i * g;
                    h[k] = o * c[k].tanh();
                }
                Ok(CellOutput {
                    hidden: h,
                    cell_state: Some(c),
                })
            }
            CellKind::Gru => {
                let mut a = self.b.data().to_vec();
                matvec_add(self.wx.data(), 3 * u, self.in_dim, x, &mut a);
                // update and reset gates see h_prev directly
                matvec_add(&self.wh.data()[..u * u], u, u, h_prev, &mut a[..u]);
                matvec_add(&self.wh.data()[u * u..2 * u * u], u, u, h_prev, &mut a[u..2 * u]);
                let z: Vec<f64> = a[..u].iter().map(|v| sigmoid(*v)).collect();
                let r: Vec<f64> = a[u..2 * u].iter().map(|v| sigmoid(*v)).collect();
                let rh: Vec<f64> = r.iter().zip(h_prev).map(|(ri, hi)| ri * hi).collect();
                matvec_add(&self.wh.data()[2 * u * u..], u, u, &rh, &mut a[2 * u..]);
                let mut h = vec![0.0; u];
                for k in 0..u {
                    let cand = a[2 * u + k].tanh();
                    h[k] = (1.0 - z[k]) * h_prev[k] + z[k] * cand;
                }
                Ok(CellOutput {
                    hidden: h,
                    cell_state: None,
                })
            }
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, RecurrentCache), NnError> {
        self.check_input(x)?;
        let steps = x.rows();
        let u = self.units;
        let g = self.cell.gate_count();

        let mut cache = RecurrentCache {
            input: x.clone(),
            h: vec![0.0; steps * u],
            gates: if g > 1 { vec![0.0; steps * g * u] } else { Vec::new() },
            c: Vec::new(),
            tanh_c: Vec::new(),
            rh: Vec::new(),
        };
        if self.cell == CellKind::Lstm {
            cache.c = vec![0.0; steps * u];
            cache.tanh_c = vec![0.0; steps * u];
        }
        if self.cell == CellKind::Gru {
            cache.rh = vec![0.0; steps * u];
        }

        let zeros = vec![0.0; u];
        let mut a = vec![0.0; g * u];
        let mut h_t = vec![0.0; u];
        let mut c_t = vec![0.0; u];
        for t in 0..steps {
            let xt = x.row(t);
            a.copy_from_slice(self.b.data());
            matvec_add(self.wx.data(), g * u, self.in_dim, xt, &mut a);

            {
                let h_prev = if t == 0 {
                    zeros.as_slice()
                } else {
                    &cache.h[(t - 1) * u..t * u]
                };
                match self.cell {
                    CellKind::Srnn => {
                        matvec_add(self.wh.data(), u, u, h_prev, &mut a);
                        for k in 0..u {
                            h_t[k] = a[k].tanh();
                        }
                    }
                    CellKind::Lstm => {
                        let c_prev = if t == 0 {
                            zeros.as_slice()
                        } else {
                            &cache.c[(t - 1) * u..t * u]
                        };
                        matvec_add(self.wh.data(), 4 * u, u, h_prev, &mut a);
                        for k in 0..u {
                            let i = sigmoid(a[k]);
                            let f = sigmoid(a[u + k]);
                            let gg = a[2 * u + k].tanh();
                            let o = sigmoid(a[3 * u + k]);
                            let c = f * c_prev[k] + i * gg;
                            let tc = c.tanh();
                            cache.gates[t * 4 * u + k] = i;
                            cache.gates[t * 4 * u + u + k] = f;
                            cache.gates[t * 4 * u + 2 * u + k] = gg;
                            cache.gates[t * 4 * u + 3 * u + k] = o;
                            cache.tanh_c[t * u + k] = tc;
                            c_t[k] = c;
                            h_t[k] = o * tc;
                        }
                    }
                    CellKind::Gru => {
                        matvec_add(&self.wh.data()[..u * u], u, u, h_prev, &mut a[..u]);
                        matvec_add(
                            &self.wh.data()[u * u..2 * u * u],
                            u,
                            u,
                            h_prev,
                            &mut a[u..2 * u],
                        );
                        for k in 0..u {
                            let z = sigmoid(a[k]);
                            let r = sigmoid(a[u + k]);
                            cache.gates[t * 3 * u + k] = z;
                            cache.gates[t * 3 * u + u + k] = r;
                            cache.rh[t * u + k] = r * h_prev[k];
                        }
                        {
                            let (_, tail) = a.split_at_mut(2 * u);
                            matvec_add(
                                &self.wh.data()[2 * u * u..],
                                u,
                                u,
                                &cache.rh[t * u..(t + 1) * u],
                                tail,
                            );
                        }
                        for k in 0..u {
                            let z = cache.gates[t * 3 * u + k];
                            let cand = a[2 * u + k].tanh();
                            cache.gates[t * 3 * u + 2 * u + k] = cand;
                            h_t[k] = (1.0 - z) * h_prev[k] + z * cand;
                        }
                    }
                }
            }

            cache.h[t * u..(t + 1) * u].copy_from_slice(&h_t);
            if self.cell == CellKind::Lstm {
                cache.c[t * u..(t + 1) * u].copy_from_slice(&c_t);
            }
        }

        let out = if self.return_sequences {
            Tensor::from_vec(&[steps, u], cache.h.clone())?
        } else {
            Tensor::from_vec(&[u], cache.h[(steps - 1) * u..].to_vec())?
        };
        Ok((out, cache))
    }

    pub fn backward(
        &self,
        cache: &RecurrentCache,
        grad_out: &Tensor,
        gwx: &mut Tensor,
        gwh: &mut Tensor,
        gb: &mut Tensor,
    ) -> Result<Tensor, NnError> {
        let steps = cache.input.rows();
        let u = self.units;
        let expected: &[usize] = if self.return_sequences {
            &[steps, u][..]
        } else {
            &[u][..]
        };
        if grad_out.shape() != expected {
            return Err(NnError::ShapeMismatch {
                context: "recurrent grad",
                expected: expected.to_vec(),
                found: grad_out.shape().to_vec(),
            });
        }

        let zeros = vec![0.0; u];
        let mut dx = Tensor::zeros(cache.input.shape());
        let mut dh_next = vec![0.0; u];
        let mut dc_next = vec![0.0; u];
        let g = self.cell.gate_count();
        let mut da = vec![0.0; g * u];

        for t in (0..steps).rev() {
            let mut dh: Vec<f64> = dh_next.clone();
            if self.return_sequences {
                for k in 0..u {
                    dh[k] += grad_out.data()[t * u + k];
                }
            } else if t == steps - 1 {
                for k in 0..u {
                    dh[k] += grad_out.data()[k];
                }
            }

            let h_prev = if t == 0 {
                zeros.as_slice()
            } else {
                &cache.h[(t - 1) * u..t * u]
            };
            let xt = cache.input.row(t);

            match self.cell {
                CellKind::Srnn => {
                    // h = tanh(a)
                    for k in 0..u {
                        let h = cache.h[t * u + k];
                        da[k] = dh[k] * (1.0 - h * h);
                    }
                    outer_add(gwx.data_mut(), &da, xt);
                    outer_add(gwh.data_mut(), &da, h_prev);
                    for k in 0..u {
                        gb.data_mut()[k] += da[k];
                    }
                    matvec_t_add(self.wx.data(), u, self.in_dim, &da, dx.row_mut(t));
                    dh_next.iter_mut().for_each(|v| *v = 0.0);
                    matvec_t_add(self.wh.data(), u, u, &da, &mut dh_next);
                }
                CellKind::Lstm => {
                    let c_prev = if t == 0 {
                        zeros.as_slice()
                    } else {
                        &cache.c[(t - 1) * u..t * u]
                    };
                    let gates = &cache.gates[t * 4 * u..(t + 1) * 4 * u];
                    for k in 0..u {
                        let i = gates[k];
                        let f = gates[u + k];
                        let gg = gates[2 * u + k];
                        let o = gates[3 * u + k];
                        let tc = cache.tanh_c[t * u + k];
                        let dc = dh[k] * o * (1.0 - tc * tc) + dc_next[k];
                        da[k] = dc * gg * i * (1.0 - i); // input gate
                        da[u + k] = dc * c_prev[k] * f * (1.0 - f); // forget gate
                        da[2 * u + k] = dc * i * (1.0 - gg * gg); // candidate
                        da[3 * u + k] = dh[k] * tc * o * (1.0 - o); // output gate
                        dc_next[k] = dc * f;
                    }
                    outer_add(gwx.data_mut(), &da, xt);
                    outer_add(gwh.data_mut(), &da, h_prev);
                    for k in 0..4 * u {
                        gb.data_mut()[k] += da[k];
                    }
                    matvec_t_add(self.wx.data(), 4 * u, self.in_dim, &da, dx.row_mut(t));
                    dh_next.iter_mut().for_each(|v| *v = 0.0);
                    matvec_t_add(self.wh.data(), 4 * u, u, &da, &mut dh_next);
                }
                CellKind::Gru => {
                    let gates = &cache.gates[t * 3 * u..(t + 1) * 3 * u];
                    // candidate branch first: da_h, then d(r⊙h_prev)
                    for k in 0..u {
                        let z = gates[k];
                        let cand = gates[2 * u + k];
                        da[2 * u + k] = dh[k] * z * (1.0 - cand * cand);
                    }
                    let mut d_rh = vec![0.0; u];
                    matvec_t_add(
                        &self.wh.data()[2 * u * u..],
                        u,
                        u,
                        &da[2 * u..],
                        &mut d_rh,
                    );
                    for k in 0..u {
                        let z = gates[k];
                        let r = gates[u + k];
                        let cand = gates[2 * u + k];
                        da[k] = dh[k] * (cand - h_prev[k]) * z * (1.0 - z); // update gate
                        da[u + k] = d_rh[k] * h_prev[k] * r * (1.0 - r); // reset gate
                    }
                    outer_add(gwx.data_mut(), &da, xt);
                    outer_add(&mut gwh.data_mut()[..u * u], &da[..u], h_prev);
                    outer_add(&mut gwh.data_mut()[u * u..2 * u * u], &da[u..2 * u], h_prev);
                    outer_add(
                        &mut gwh.data_mut()[2 * u * u..],
                        &da[2 * u..],
                        &cache.rh[t * u..(t + 1) * u],
                    );
                    for k in 0..3 * u {
                        gb.data_mut()[k] += da[k];
                    }
                    matvec_t_add(self.wx.data(), 3 * u, self.in_dim, &da, dx.row_mut(t));
                    for k in 0..u {
                        let z = gates[k];
                        let r = gates[u + k];
                        dh_next[k] = dh[k] * (1.0 - z) + d_rh[k] * r;
                    }
                    matvec_t_add(&self.wh.data()[..u * u], u, u, &da[..u], &mut dh_next);
                    matvec_t_add(
                        &self.wh.data()[u * u..2 * u * u],
                        u,
                        u,
                        &da[u..2 * u],
                        &mut dh_next,
                    );
                }
            }
        }
        Ok(dx)
    }
}
