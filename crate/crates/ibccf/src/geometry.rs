//! Box parameterizations, region layout and Gaussian regression labels.
//!
//! Boxes come in two equivalent forms: `BoundaryBox` holds the four boundary
//! coordinates the 1D filters estimate, `CenterBox` holds center plus size.
//! A `RegionSpec` is an axis-aligned pixel window, possibly reaching outside
//! the frame; cropping replicates edge pixels in that case.

use crate::error::{IbccfError, Result};
use ndarray::{Array1, Array2};

/// Target extent as left/right/top/bottom coordinates (x grows right, y grows
/// down). `left < right` and `top < bottom` always hold for a valid box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryBox {
    pub left: f64,
    pub right: f64,
    pub top: f64,
    pub bottom: f64,
}

impl BoundaryBox {
    pub fn new(left: f64, right: f64, top: f64, bottom: f64) -> Result<Self> {
        let b = BoundaryBox { left, right, top, bottom };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.left, self.right, self.top, self.bottom];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(IbccfError::InvalidBox(format!("non-finite coordinate: {self:?}")));
        }
        if self.left >= self.right || self.top >= self.bottom {
            return Err(IbccfError::InvalidBox(format!(
                "requires left < right and top < bottom: {self:?}"
            )));
        }
        Ok(())
    }

    /// From the `x,y,w,h` convention (top-left corner plus size).
    pub fn from_ltwh(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        BoundaryBox::new(x, x + w, y, y + h)
    }

    /// Back to `(x, y, w, h)`.
    pub fn to_ltwh(&self) -> (f64, f64, f64, f64) {
        (self.left, self.top, self.right - self.left, self.bottom - self.top)
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn height(&self) -> f64 {
        self.bottom - self.top
    }

    pub fn to_center(&self) -> CenterBox {
        CenterBox {
            cx: 0.5 * (self.left + self.right),
            cy: 0.5 * (self.top + self.bottom),
            width: self.right - self.left,
            height: self.bottom - self.top,
        }
    }

    /// Coordinate of one boundary.
    pub fn side(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
            Side::Top => self.top,
            Side::Bottom => self.bottom,
        }
    }
}

/// Target extent as center plus width and height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterBox {
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
}

impl CenterBox {
    pub fn new(cx: f64, cy: f64, width: f64, height: f64) -> Self {
        CenterBox { cx, cy, width, height }
    }

    pub fn to_boundary(&self) -> Result<BoundaryBox> {
        BoundaryBox::new(
            self.cx - 0.5 * self.width,
            self.cx + 0.5 * self.width,
            self.cy - 0.5 * self.height,
            self.cy + 0.5 * self.height,
        )
    }
}

/// The four boundaries, in the fixed order used everywhere in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Top, Side::Bottom];

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
            Side::Top => 2,
            Side::Bottom => 3,
        }
    }

    /// True for sides whose localization axis is horizontal.
    pub fn horizontal(self) -> bool {
        matches!(self, Side::Left | Side::Right)
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Top => "top",
            Side::Bottom => "bottom",
        }
    }
}

/// Integer pixel window. The origin may be negative or otherwise reach
/// outside the frame; `replicate_border` selects whether cropping clamps
/// source coordinates (edge replication) or rejects such regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionSpec {
    pub origin_row: i64,
    pub origin_col: i64,
    pub rows: usize,
    pub cols: usize,
    pub replicate_border: bool,
}

impl RegionSpec {
    pub fn new(origin_row: i64, origin_col: i64, rows: usize, cols: usize) -> Self {
        RegionSpec { origin_row, origin_col, rows, cols, replicate_border: true }
    }

    pub fn end_row(&self) -> i64 {
        self.origin_row + self.rows as i64
    }

    pub fn end_col(&self) -> i64 {
        self.origin_col + self.cols as i64
    }
}

pub(crate) fn centered_extent(center: f64, extent: usize) -> i64 {
    (center - 0.5 * (extent as f64 - 1.0)).round() as i64
}

pub(crate) fn scaled_extent(v: f64) -> usize {
    (v.round() as i64).max(1) as usize
}

/// Search window for the center filter: `padding` times the box size,
/// centered on the box center.
pub fn center_region_spec(b: &CenterBox, padding: f64) -> Result<RegionSpec> {
    if !(padding > 0.0) || !padding.is_finite() {
        return Err(IbccfError::InvalidParameter {
            name: "padding",
            why: format!("must be positive and finite, got {padding}"),
        });
    }
    let rows = scaled_extent(padding * b.height);
    let cols = scaled_extent(padding * b.width);
    Ok(RegionSpec::new(
        centered_extent(b.cy, rows),
        centered_extent(b.cx, cols),
        rows,
        cols,
    ))
}

/// Region a boundary filter observes. Left/right regions are `alpha*w` wide
/// and `beta*h` tall, centered on the respective edge midpoint; top/bottom
/// swap the roles of the axes.
pub fn boundary_region_spec(b: &CenterBox, side: Side, alpha: f64, beta: f64) -> Result<RegionSpec> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(IbccfError::InvalidParameter {
                name: if name == "alpha" { "alpha" } else { "beta" },
                why: format!("must be positive and finite, got {v}"),
            });
        }
    }
    let (cy, cx, rows, cols) = match side {
        Side::Left => (b.cy, b.cx - 0.5 * b.width, scaled_extent(beta * b.height), scaled_extent(alpha * b.width)),
        Side::Right => (b.cy, b.cx + 0.5 * b.width, scaled_extent(beta * b.height), scaled_extent(alpha * b.width)),
        Side::Top => (b.cy - 0.5 * b.height, b.cx, scaled_extent(alpha * b.height), scaled_extent(beta * b.width)),
        Side::Bottom => (b.cy + 0.5 * b.height, b.cx, scaled_extent(alpha * b.height), scaled_extent(beta * b.width)),
    };
    Ok(RegionSpec::new(
        centered_extent(cy, rows),
        centered_extent(cx, cols),
        rows,
        cols,
    ))
}

/// Regression target for the 2D filter: peak exactly 1.0 at the center cell,
/// falling off with circular distance so the label is symmetric under
/// circular indexing.
#[derive(Debug, Clone)]
pub struct Label2D {
    pub values: Array2<f64>,
    pub peak: (usize, usize),
}

/// 1D counterpart used by the boundary filters.
#[derive(Debug, Clone)]
pub struct Label1D {
    pub values: Array1<f64>,
    pub peak: usize,
}

fn circular_dist(i: usize, peak: usize, n: usize) -> f64 {
    let d = (i as i64 - peak as i64).unsigned_abs() as usize;
    d.min(n - d) as f64
}

pub fn gaussian_label_2d(rows: usize, cols: usize, sigma: f64) -> Result<Label2D> {
    if rows == 0 || cols == 0 {
        return Err(IbccfError::InvalidParameter { name: "rows/cols", why: "label must be non-empty".into() });
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(IbccfError::InvalidParameter { name: "sigma", why: format!("must be positive, got {sigma}") });
    }
    let peak = (rows / 2, cols / 2);
    let inv = 1.0 / (2.0 * sigma * sigma);
    let values = Array2::from_shape_fn((rows, cols), |(r, c)| {
        let dr = circular_dist(r, peak.0, rows);
        let dc = circular_dist(c, peak.1, cols);
        (-(dr * dr + dc * dc) * inv).exp()
    });
    Ok(Label2D { values, peak })
}

pub fn gaussian_label_1d(len: usize, sigma: f64) -> Result<Label1D> {
    if len == 0 {
        return Err(IbccfError::InvalidParameter { name: "len", why: "label must be non-empty".into() });
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(IbccfError::InvalidParameter { name: "sigma", why: format!("must be positive, got {sigma}") });
    }
    let peak = len / 2;
    let inv = 1.0 / (2.0 * sigma * sigma);
    let values = Array1::from_shape_fn(len, |i| {
        let d = circular_dist(i, peak, len);
        (-d * d * inv).exp()
    });
    Ok(Label1D { values, peak })
}

/// Intersection over union of two boxes; 0.0 when they are disjoint.
pub fn iou(a: &BoundaryBox, b: &BoundaryBox) -> f64 {
    let iw = (a.right.min(b.right) - a.left.max(b.left)).max(0.0);
    let ih = (a.bottom.min(b.bottom) - a.top.max(b.top)).max(0.0);
    let inter = iw * ih;
    let union = a.width() * a.height() + b.width() * b.height() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Cells two regions share, with paired index maps.
///
/// `a_idx[i]` and `b_idx[i]` address the same absolute cell, as row-major
/// flat indices into region `a` and region `b` respectively. Both maps
/// enumerate the intersection in the same (row-major) order.
#[derive(Debug, Clone)]
pub struct CommonRegion {
    pub origin_row: i64,
    pub origin_col: i64,
    pub rows: usize,
    pub cols: usize,
    pub a_idx: Vec<usize>,
    pub b_idx: Vec<usize>,
}

pub fn common_region(a: &RegionSpec, b: &RegionSpec) -> Result<CommonRegion> {
    let row0 = a.origin_row.max(b.origin_row);
    let col0 = a.origin_col.max(b.origin_col);
    let row1 = a.end_row().min(b.end_row());
    let col1 = a.end_col().min(b.end_col());
    if row0 >= row1 || col0 >= col1 {
        return Err(IbccfError::NoOverlap);
    }
    let rows = (row1 - row0) as usize;
    let cols = (col1 - col0) as usize;
    let mut a_idx = Vec::with_capacity(rows * cols);
    let mut b_idx = Vec::with_capacity(rows * cols);
    for r in row0..row1 {
        for c in col0..col1 {
            a_idx.push(((r - a.origin_row) as usize) * a.cols + (c - a.origin_col) as usize);
            b_idx.push(((r - b.origin_row) as usize) * b.cols + (c - b.origin_col) as usize);
        }
    }
    Ok(CommonRegion { origin_row: row0, origin_col: col0, rows, cols, a_idx, b_idx })
}
