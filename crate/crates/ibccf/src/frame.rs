//! Grayscale frames, region cropping and resampling.

use crate::error::{IbccfError, Result};
use crate::geometry::RegionSpec;
use ndarray::Array2;

/// A grayscale frame with intensities in `[0, 255]`.
#[derive(Debug, Clone)]
pub struct Frame {
    pub data: Array2<f64>,
}

impl Frame {
    pub fn new(data: Array2<f64>) -> Self {
        Frame { data }
    }

    /// Builds a frame from row-major 8-bit intensities.
    pub fn from_luma(rows: usize, cols: usize, pixels: &[u8]) -> Result<Self> {
        if pixels.len() != rows * cols {
            return Err(IbccfError::ShapeMismatch(format!(
                "expected {} pixels for a {rows}x{cols} frame, got {}",
                rows * cols,
                pixels.len()
            )));
        }
        let data = Array2::from_shape_fn((rows, cols), |(r, c)| pixels[r * cols + c] as f64);
        Ok(Frame { data })
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    /// Pixel value with coordinates clamped to the frame.
    pub fn at_clamped(&self, r: i64, c: i64) -> f64 {
        let r = r.clamp(0, self.rows() as i64 - 1) as usize;
        let c = c.clamp(0, self.cols() as i64 - 1) as usize;
        self.data[(r, c)]
    }

    /// Extracts a region. Pixels outside the frame replicate the nearest edge
    /// pixel; with `replicate_border` cleared such regions are an error.
    pub fn crop(&self, spec: &RegionSpec) -> Result<Array2<f64>> {
        if spec.rows == 0 || spec.cols == 0 {
            return Err(IbccfError::InvalidParameter {
                name: "region",
                why: "empty region".into(),
            });
        }
        let inside = spec.origin_row >= 0
            && spec.origin_col >= 0
            && spec.end_row() <= self.rows() as i64
            && spec.end_col() <= self.cols() as i64;
        if !inside && !spec.replicate_border {
            return Err(IbccfError::OutOfFrame);
        }
        Ok(Array2::from_shape_fn((spec.rows, spec.cols), |(r, c)| {
            self.at_clamped(spec.origin_row + r as i64, spec.origin_col + c as i64)
        }))
    }
}

/// Bilinear resampling to fixed dimensions, with pixel-center alignment.
pub fn resample(src: &Array2<f64>, rows: usize, cols: usize) -> Result<Array2<f64>> {
    if rows == 0 || cols == 0 || src.is_empty() {
        return Err(IbccfError::InvalidParameter {
            name: "resample",
            why: "empty source or destination".into(),
        });
    }
    let (sr, sc) = src.dim();
    if (sr, sc) == (rows, cols) {
        return Ok(src.clone());
    }
    let row_scale = sr as f64 / rows as f64;
    let col_scale = sc as f64 / cols as f64;
    Ok(Array2::from_shape_fn((rows, cols), |(r, c)| {
        let sy = ((r as f64 + 0.5) * row_scale - 0.5).clamp(0.0, sr as f64 - 1.0);
        let sx = ((c as f64 + 0.5) * col_scale - 0.5).clamp(0.0, sc as f64 - 1.0);
        let y0 = sy.floor() as usize;
        let x0 = sx.floor() as usize;
        let y1 = (y0 + 1).min(sr - 1);
        let x1 = (x0 + 1).min(sc - 1);
        let fy = sy - y0 as f64;
        let fx = sx - x0 as f64;
        let top = src[(y0, x0)] * (1.0 - fx) + src[(y0, x1)] * fx;
        let bot = src[(y1, x0)] * (1.0 - fx) + src[(y1, x1)] * fx;
        top * (1.0 - fy) + bot * fy
    }))
}
