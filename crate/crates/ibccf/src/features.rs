//! Feature extraction for filter training and detection.
//!
//! Everything is channels-first: a `FeatureMap` holds `(channels, rows, cols)`
//! with all channels on the same cell grid. Boundary regions pool cells along
//! one axis only, keeping full pixel resolution along the localization axis,
//! so 1D precision is never quantized more than the center filter's.

use crate::error::{IbccfError, Result};
use ndarray::{Array2, Array3};

const NORM_EPS: f64 = 1e-4;

/// Multi-channel feature grid plus per-channel detection weights.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    pub data: Array3<f64>,
    pub cell_size: usize,
    pub weights: Vec<f64>,
}

impl FeatureMap {
    pub fn new(data: Array3<f64>, cell_size: usize) -> Self {
        let channels = data.dim().0;
        FeatureMap { data, cell_size, weights: vec![1.0; channels] }
    }

    pub fn channels(&self) -> usize {
        self.data.dim().0
    }

    pub fn rows(&self) -> usize {
        self.data.dim().1
    }

    pub fn cols(&self) -> usize {
        self.data.dim().2
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.channels() {
            return Err(IbccfError::ShapeMismatch(format!(
                "{} weights for {} channels",
                self.weights.len(),
                self.channels()
            )));
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(IbccfError::InvalidParameter {
                name: "features",
                why: "non-finite feature value".into(),
            });
        }
        Ok(())
    }
}

/// Which feature stack the tracker extracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// Normalized intensity only.
    Grayscale,
    /// Gradient orientation histograms plus a magnitude channel plus
    /// cell-averaged intensity.
    GradientHist,
}

impl FeatureKind {
    pub fn channels(self, bins: usize) -> usize {
        match self {
            FeatureKind::Grayscale => 1,
            FeatureKind::GradientHist => bins + 2,
        }
    }
}

/// Single-channel normalized intensity: `value/255 - 0.5`, cell size 1.
pub fn extract_grayscale(patch: &Array2<f64>) -> FeatureMap {
    let (rows, cols) = patch.dim();
    let mut data = Array3::zeros((1, rows, cols));
    data.index_axis_mut(ndarray::Axis(0), 0)
        .assign(&patch.mapv(|v| v / 255.0 - 0.5));
    FeatureMap::new(data, 1)
}

fn grad_at(patch: &Array2<f64>, r: usize, c: usize) -> (f64, f64) {
    let (rows, cols) = patch.dim();
    let cm = if c == 0 { 0 } else { c - 1 };
    let cp = (c + 1).min(cols - 1);
    let rm = if r == 0 { 0 } else { r - 1 };
    let rp = (r + 1).min(rows - 1);
    (patch[(r, cp)] - patch[(r, cm)], patch[(rp, c)] - patch[(rm, c)])
}

/// Gradient orientation histograms with square cells; see
/// [`extract_gradient_hist_cells`] for the general form.
pub fn extract_gradient_hist(patch: &Array2<f64>, cell: usize, bins: usize) -> Result<FeatureMap> {
    extract_gradient_hist_cells(patch, cell, cell, bins)
}

/// Gradient orientation histograms over `cell_rows x cell_cols` cells.
///
/// Orientations are unsigned (folded to `[0, pi)`), magnitudes accumulate
/// into `bins` channels, and each cell's histogram is normalized to L2 norm
/// at most 1. One extra channel carries the relative gradient magnitude of
/// the cell. Trailing pixels that do not fill a cell are dropped.
pub fn extract_gradient_hist_cells(
    patch: &Array2<f64>,
    cell_rows: usize,
    cell_cols: usize,
    bins: usize,
) -> Result<FeatureMap> {
    if cell_rows == 0 || cell_cols == 0 || bins == 0 {
        return Err(IbccfError::InvalidParameter {
            name: "cell/bins",
            why: "cell dimensions and bin count must be positive".into(),
        });
    }
    let (rows, cols) = patch.dim();
    let grid_rows = rows / cell_rows;
    let grid_cols = cols / cell_cols;
    if grid_rows == 0 || grid_cols == 0 {
        return Err(IbccfError::ShapeMismatch(format!(
            "patch {rows}x{cols} smaller than one {cell_rows}x{cell_cols} cell"
        )));
    }
    let mut hist: Array3<f64> = Array3::zeros((bins, grid_rows, grid_cols));
    for gr in 0..grid_rows {
        for gc in 0..grid_cols {
            for r in gr * cell_rows..(gr + 1) * cell_rows {
                for c in gc * cell_cols..(gc + 1) * cell_cols {
                    let (gx, gy) = grad_at(patch, r, c);
                    let mag = gx.hypot(gy);
                    if mag == 0.0 {
                        continue;
                    }
                    let mut theta = gy.atan2(gx);
                    if theta < 0.0 {
                        theta += std::f64::consts::PI;
                    }
                    if theta >= std::f64::consts::PI {
                        theta -= std::f64::consts::PI;
                    }
                    let bin = ((theta / std::f64::consts::PI * bins as f64) as usize).min(bins - 1);
                    hist[(bin, gr, gc)] += mag;
                }
            }
        }
    }
    let mut data = Array3::zeros((bins + 1, grid_rows, grid_cols));
    let mut max_norm = 0.0f64;
    let mut norms = Array2::zeros((grid_rows, grid_cols));
    for gr in 0..grid_rows {
        for gc in 0..grid_cols {
            let norm = (0..bins).map(|b| hist[(b, gr, gc)].powi(2)).sum::<f64>().sqrt();
            norms[(gr, gc)] = norm;
            max_norm = max_norm.max(norm);
            for b in 0..bins {
                data[(b, gr, gc)] = hist[(b, gr, gc)] / (norm + NORM_EPS);
            }
        }
    }
    for gr in 0..grid_rows {
        for gc in 0..grid_cols {
            data[(bins, gr, gc)] = norms[(gr, gc)] / (max_norm + NORM_EPS);
        }
    }
    let mut fm = FeatureMap::new(data, cell_rows.max(cell_cols));
    fm.cell_size = cell_rows.max(cell_cols);
    Ok(fm)
}

fn cell_mean_gray(patch: &Array2<f64>, cell_rows: usize, cell_cols: usize) -> Array2<f64> {
    let (rows, cols) = patch.dim();
    let grid_rows = rows / cell_rows;
    let grid_cols = cols / cell_cols;
    Array2::from_shape_fn((grid_rows, grid_cols), |(gr, gc)| {
        let mut sum = 0.0;
        for r in gr * cell_rows..(gr + 1) * cell_rows {
            for c in gc * cell_cols..(gc + 1) * cell_cols {
                sum += patch[(r, c)] / 255.0 - 0.5;
            }
        }
        sum / (cell_rows * cell_cols) as f64
    })
}

/// The configured feature stack over possibly rectangular cells.
pub fn extract_stack(
    patch: &Array2<f64>,
    kind: FeatureKind,
    cell_rows: usize,
    cell_cols: usize,
    bins: usize,
) -> Result<FeatureMap> {
    match kind {
        FeatureKind::Grayscale => {
            if cell_rows == 1 && cell_cols == 1 {
                Ok(extract_grayscale(patch))
            } else {
                let gray = cell_mean_gray(patch, cell_rows, cell_cols);
                if gray.is_empty() {
                    return Err(IbccfError::ShapeMismatch(format!(
                        "patch {}x{} smaller than one {cell_rows}x{cell_cols} cell",
                        patch.nrows(),
                        patch.ncols()
                    )));
                }
                let (gr, gc) = gray.dim();
                let mut data = Array3::zeros((1, gr, gc));
                data.index_axis_mut(ndarray::Axis(0), 0).assign(&gray);
                let mut fm = FeatureMap::new(data, cell_rows.max(cell_cols));
                fm.cell_size = cell_rows.max(cell_cols);
                Ok(fm)
            }
        }
        FeatureKind::GradientHist => {
            let hist = extract_gradient_hist_cells(patch, cell_rows, cell_cols, bins)?;
            let gray = cell_mean_gray(patch, cell_rows, cell_cols);
            let (ch, gr, gc) = hist.data.dim();
            let mut data = Array3::zeros((ch + 1, gr, gc));
            for c in 0..ch {
                data.index_axis_mut(ndarray::Axis(0), c)
                    .assign(&hist.data.index_axis(ndarray::Axis(0), c));
            }
            data.index_axis_mut(ndarray::Axis(0), ch).assign(&gray);
            let mut fm = FeatureMap::new(data, hist.cell_size);
            fm.cell_size = hist.cell_size;
            Ok(fm)
        }
    }
}

fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / (n as f64 - 1.0)).cos()))
        .collect()
}

/// Separable 2D Hann window over every channel. Edge cells go to exactly 0.
pub fn apply_cosine_window(fm: &FeatureMap) -> FeatureMap {
    let (ch, rows, cols) = fm.data.dim();
    let wr = hann(rows);
    let wc = hann(cols);
    let mut data = fm.data.clone();
    for c in 0..ch {
        for r in 0..rows {
            for col in 0..cols {
                data[(c, r, col)] *= wr[r] * wc[col];
            }
        }
    }
    FeatureMap { data, cell_size: fm.cell_size, weights: fm.weights.clone() }
}

/// Hann window along the localization axis (columns) only, for
/// boundary-region features.
pub fn apply_cosine_window_1d(fm: &FeatureMap) -> FeatureMap {
    let (ch, rows, cols) = fm.data.dim();
    let wc = hann(cols);
    let mut data = fm.data.clone();
    for c in 0..ch {
        for r in 0..rows {
            for col in 0..cols {
                data[(c, r, col)] *= wc[col];
            }
        }
    }
    FeatureMap { data, cell_size: fm.cell_size, weights: fm.weights.clone() }
}
