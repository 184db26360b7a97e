//! Flat-slice matrix/vector kernels used by the layer implementations.
//! Matrices are row-major.

/// out = W·x for W of `rows`×`cols`.
pub fn matvec(w: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(w.len(), rows * cols);
    debug_assert_eq!(x.len(), cols);
    debug_assert_eq!(out.len(), rows);
    for (r, o) in out.iter_mut().enumerate() {
        let row = &w[r * cols..(r + 1) * cols];
        *o = dot(row, x);
    }
}

/// out += W·x.
pub fn matvec_add(w: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(w.len(), rows * cols);
    for (r, o) in out.iter_mut().enumerate().take(rows) {
        let row = &w[r * cols..(r + 1) * cols];
        *o += dot(row, x);
    }
}

/// out += Wᵀ·v, with v of length `rows` and out of length `cols`.
pub fn matvec_t_add(w: &[f64], rows: usize, cols: usize, v: &[f64], out: &mut [f64]) {
    debug_assert_eq!(w.len(), rows * cols);
    debug_assert_eq!(v.len(), rows);
    debug_assert_eq!(out.len(), cols);
    for (r, &vr) in v.iter().enumerate() {
        if vr == 0.0 {
            continue;
        }
        let row = &w[r * cols..(r + 1) * cols];
        for (o, &wrc) in out.iter_mut().zip(row) {
            *o += vr * wrc;
        }
    }
}

/// dW += v ⊗ x (outer product), dW of `v.len()`×`x.len()`.
pub fn outer_add(dw: &mut [f64], v: &[f64], x: &[f64]) {
    debug_assert_eq!(dw.len(), v.len() * x.len());
    let cols = x.len();
    for (r, &vr) in v.iter().enumerate() {
        if vr == 0.0 {
            continue;
        }
        let row = &mut dw[r * cols..(r + 1) * cols];
        for (o, &xc) in row.iter_mut().zip(x) {
            *o += vr * xc;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn add_assign(out: &mut [f64], rhs: &[f64]) {
    for (o, r) in out.iter_mut().zip(rhs) {
        *o += r;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_small() {
        let w = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]; // 2x3
        let mut out = [0.0; 2];
        matvec(&w, 2, 3, &[1.0, 0.0, -1.0], &mut out);
        assert_eq!(out, [-2.0, -2.0]);
    }

    #[test]
    fn matvec_t_matches_transpose() {
        let w = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]; // 2x3
        let mut out = [0.0; 3];
        matvec_t_add(&w, 2, 3, &[1.0, 1.0], &mut out);
        assert_eq!(out, [5.0, 7.0, 9.0]);
    }

    #[test]
    fn outer_accumulates() {
        let mut dw = [0.0; 4];
        outer_add(&mut dw, &[1.0, 2.0], &[3.0, 4.0]);
        outer_add(&mut dw, &[1.0, 0.0], &[1.0, 1.0]);
        assert_eq!(dw, [4.0, 5.0, 6.0, 8.0]);
    }
}
