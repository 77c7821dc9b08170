//! Thin wrappers over rustfft for the transform shapes used by the filters.
//!
//! Convention: forward transforms are unnormalized, inverse transforms carry
//! the full 1/N factor, so `ifft(fft(x)) == x`. All filter math in this crate
//! assumes exactly this scaling.

use ndarray::{Array1, Array2, Array3};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn process(buf: &mut [Complex64], inverse: bool) {
    if buf.len() <= 1 {
        return;
    }
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let fft = if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        };
        fft.process(buf);
    });
}

fn transform_rows(a: &mut Array2<Complex64>, inverse: bool) {
    let cols = a.ncols();
    let mut scratch = vec![Complex64::ZERO; cols];
    for mut row in a.rows_mut() {
        for (s, v) in scratch.iter_mut().zip(row.iter()) {
            *s = *v;
        }
        process(&mut scratch, inverse);
        for (v, s) in row.iter_mut().zip(scratch.iter()) {
            *v = *s;
        }
    }
}

fn transform_cols(a: &mut Array2<Complex64>, inverse: bool) {
    let rows = a.nrows();
    let mut scratch = vec![Complex64::ZERO; rows];
    for mut col in a.columns_mut() {
        for (s, v) in scratch.iter_mut().zip(col.iter()) {
            *s = *v;
        }
        process(&mut scratch, inverse);
        for (v, s) in col.iter_mut().zip(scratch.iter()) {
            *v = *s;
        }
    }
}

pub fn fft1(x: &Array1<f64>) -> Array1<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    process(&mut buf, false);
    Array1::from(buf)
}

pub fn ifft1(x: &Array1<Complex64>) -> Array1<Complex64> {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.to_vec();
    process(&mut buf, true);
    let scale = 1.0 / n as f64;
    Array1::from(buf.into_iter().map(|v| v * scale).collect::<Vec<_>>())
}

pub fn fft2(x: &Array2<f64>) -> Array2<Complex64> {
    let mut c = x.mapv(|v| Complex64::new(v, 0.0));
    transform_rows(&mut c, false);
    transform_cols(&mut c, false);
    c
}

pub fn ifft2(x: &Array2<Complex64>) -> Array2<Complex64> {
    let mut c = x.to_owned();
    transform_rows(&mut c, true);
    transform_cols(&mut c, true);
    let scale = 1.0 / (x.nrows() * x.ncols()) as f64;
    c.mapv_inplace(|v| v * scale);
    c
}

/// 2D transform of every channel of a `(channels, rows, cols)` stack.
pub fn fft2_stack(x: &Array3<f64>) -> Array3<Complex64> {
    let (ch, rows, cols) = x.dim();
    let mut out = Array3::from_elem((ch, rows, cols), Complex64::ZERO);
    for c in 0..ch {
        out.index_axis_mut(ndarray::Axis(0), c)
            .assign(&fft2(&x.index_axis(ndarray::Axis(0), c).to_owned()));
    }
    out
}

/// Independent 1D transforms along the last axis, one per row.
pub fn fft_rows(x: &Array2<f64>) -> Array2<Complex64> {
    let mut c = x.mapv(|v| Complex64::new(v, 0.0));
    transform_rows(&mut c, false);
    c
}

pub fn ifft_rows(x: &Array2<Complex64>) -> Array2<Complex64> {
    let mut c = x.to_owned();
    transform_rows(&mut c, true);
    let scale = 1.0 / x.ncols() as f64;
    c.mapv_inplace(|v| v * scale);
    c
}

pub fn real2(x: &Array2<Complex64>) -> Array2<f64> {
    x.mapv(|v| v.re)
}

pub fn max_imag2(x: &Array2<Complex64>) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.im.abs()))
}
