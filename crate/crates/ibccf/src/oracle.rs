//! Dense reference solvers.
//!
//! Everything here is deliberately naive: explicit cyclic-shift system
//! matrices, dense factorizations and scalar loops, no FFTs and no rank-one
//! shortcuts. The fast paths are checked against these both in the test
//! suites and in the `selftest` command, so keep this module independent of
//! the implementations it verifies.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, Array3};

/// Ridge regression over all 2D circular shifts, solved densely.
///
/// Builds the response matrix `A[n, (c, m)] = x_c[n - m mod dims]` and solves
/// `(A^T A + lambda I) w = A^T y`. Returns spatial filter taps per channel.
pub fn dense_center_train(x: &Array3<f64>, y: &Array2<f64>, lambda: f64) -> Array3<f64> {
    let (ch, rows, cols) = x.dim();
    let n = rows * cols;
    let mut a = DMatrix::<f64>::zeros(n, ch * n);
    for nr in 0..rows {
        for nc in 0..cols {
            let row = nr * cols + nc;
            for c in 0..ch {
                for mr in 0..rows {
                    for mc in 0..cols {
                        let sr = (nr + rows - mr) % rows;
                        let sc = (nc + cols - mc) % cols;
                        a[(row, c * n + mr * cols + mc)] = x[(c, sr, sc)];
                    }
                }
            }
        }
    }
    let yv = DVector::from_fn(n, |i, _| y[(i / cols, i % cols)]);
    let mut ata = a.transpose() * &a;
    for i in 0..ch * n {
        ata[(i, i)] += lambda;
    }
    let rhs = a.transpose() * yv;
    let w = ata.lu().solve(&rhs).expect("dense normal equations are positive definite");
    Array3::from_shape_fn((ch, rows, cols), |(c, r, k)| w[c * n + r * cols + k])
}

/// 1D multi-channel counterpart of [`dense_center_train`]. `x` is
/// `(channels, len)` and all channels share the response sum.
pub fn dense_boundary_train(x: &Array2<f64>, y: &Array1<f64>, lambda: f64) -> Array2<f64> {
    let (ch, len) = x.dim();
    let mut a = DMatrix::<f64>::zeros(len, ch * len);
    for n in 0..len {
        for c in 0..ch {
            for m in 0..len {
                a[(n, c * len + m)] = x[(c, (n + len - m) % len)];
            }
        }
    }
    let yv = DVector::from_fn(len, |i, _| y[i]);
    let mut ata = a.transpose() * &a;
    for i in 0..ch * len {
        ata[(i, i)] += lambda;
    }
    let rhs = a.transpose() * yv;
    let w = ata.lu().solve(&rhs).expect("dense normal equations are positive definite");
    Array2::from_shape_fn((ch, len), |(c, m)| w[c * len + m])
}

/// Dense solve of `(mu * Q Q^T + rho I) g = rho v` where `Q`'s columns are
/// given explicitly (already zero-padded to the length of `v`).
pub fn dense_penalized_projection(columns: &[Vec<f64>], v: &[f64], mu: f64, rho: f64) -> Vec<f64> {
    let n = v.len();
    let mut m = DMatrix::<f64>::identity(n, n) * rho;
    for col in columns {
        assert_eq!(col.len(), n);
        for i in 0..n {
            if col[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                m[(i, j)] += mu * col[i] * col[j];
            }
        }
    }
    let rhs = DVector::from_fn(n, |i, _| rho * v[i]);
    let g = m.lu().solve(&rhs).expect("penalized projection system is positive definite");
    g.iter().copied().collect()
}

/// Dense solve of `(mu * s s^T + gamma I) u = gamma v`.
pub fn dense_rank_one_solve(s: &[f64], v: &[f64], mu: f64, gamma: f64) -> Vec<f64> {
    dense_penalized_projection(&[s.to_vec()], v, mu, gamma)
}

/// Central-difference gradient of `f` at `x`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut buf = x.to_vec();
    let mut grad = vec![0.0; x.len()];
    for i in 0..x.len() {
        let orig = buf[i];
        buf[i] = orig + h;
        let fp = f(&buf);
        buf[i] = orig - h;
        let fm = f(&buf);
        buf[i] = orig;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    grad
}

/// Scalar-loop 2D circular convolution `(w (*) x)[n] = sum_m w[m] x[n-m]`.
pub fn circ_conv2(w: &Array2<f64>, x: &Array2<f64>) -> Array2<f64> {
    let (rows, cols) = w.dim();
    assert_eq!(x.dim(), (rows, cols));
    Array2::from_shape_fn((rows, cols), |(nr, nc)| {
        let mut acc = 0.0;
        for mr in 0..rows {
            for mc in 0..cols {
                acc += w[(mr, mc)] * x[((nr + rows - mr) % rows, (nc + cols - mc) % cols)];
            }
        }
        acc
    })
}

/// Scalar-loop 1D circular convolution.
pub fn circ_conv1(w: &Array1<f64>, x: &Array1<f64>) -> Array1<f64> {
    let len = w.len();
    assert_eq!(x.len(), len);
    Array1::from_shape_fn(len, |n| {
        let mut acc = 0.0;
        for m in 0..len {
            acc += w[m] * x[(n + len - m) % len];
        }
        acc
    })
}
