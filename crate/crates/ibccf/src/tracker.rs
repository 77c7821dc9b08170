//! The full tracking loop: template geometry, model training and the
//! per-frame localize/refine/update cycle.
//!
//! Geometry is frozen on the first frame. Every region (the padded center
//! window and the four boundary windows) gets an integer-aligned template on
//! a shared lattice, the first-frame image plane scaled so the center
//! template's long side stays at or below `template_size`. Later frames are
//! cropped around the current box with the region extents scaled by the
//! current-to-initial size ratio and resampled back onto the fixed template,
//! so filters never change shape while the target does.
//!
//! Top and bottom crops are transposed before feature extraction: the
//! localization axis of every boundary template is its column axis, and only
//! the cross axis is cell pooled, keeping single-pixel boundary resolution.
//!
//! A step runs the center filter at the previous box, translates the box,
//! runs the four boundary filters at the translated box, clamps each
//! boundary shift and the resulting size change, then retrains all five
//! filters jointly at the refined box and blends them into the running model.

use crate::admm::{
    self, AdmmConfig, AdmmDiagnostics, BoundaryData, CommonProjection, SideArray, SideMap,
    TrainingData,
};
use crate::cf::{self, BoundaryFilter, CenterFilter};
use crate::error::{IbccfError, Result};
use crate::features::{self, FeatureKind, FeatureMap};
use crate::frame::{self, Frame};
use crate::geometry::{
    self, gaussian_label_1d, gaussian_label_2d, BoundaryBox, CenterBox, Label1D, Label2D,
    RegionSpec, Side,
};

/// Every knob of the tracker. `Default` is the reference configuration.
#[derive(Debug, Clone)]
pub struct TrackerConfig {
    /// Ridge weight shared by all five filters.
    pub lambda: f64,
    /// Near-orthogonality weight. Zero decouples the filters.
    pub mu: f64,
    /// Penalty weight of the center-filter split.
    pub rho: f64,
    /// Penalty weight of the boundary-filter splits.
    pub gamma: f64,
    pub admm_iters: usize,
    pub admm_tol: f64,
    /// Center search window as a multiple of the box size.
    pub padding: f64,
    /// Boundary window extent along its localization axis, times the
    /// corresponding box dimension.
    pub alpha: f64,
    /// Boundary window extent across the localization axis.
    pub beta: f64,
    /// Model interpolation factor per frame.
    pub eta: f64,
    /// Center label width, times the geometric mean of the box dimensions.
    pub sigma_center: f64,
    /// Boundary label width, times the corresponding box dimension.
    pub sigma_boundary: f64,
    pub feature: FeatureKind,
    pub cell_size: usize,
    /// Orientation bins when `feature` is a gradient histogram.
    pub bins: usize,
    /// Cap on the center template's long side, in template pixels.
    pub template_size: usize,
    /// Per-boundary shift limit per frame, as a fraction of the
    /// corresponding box dimension.
    pub max_boundary_step: f64,
    /// Per-frame bounds on the refined width and height relative to the
    /// pre-refinement values.
    pub min_scale: f64,
    pub max_scale: f64,
    /// Track translation only, with a fixed box size.
    pub disable_boundaries: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            lambda: 1e-4,
            mu: 0.1,
            rho: 1.0,
            gamma: 1.0,
            admm_iters: 10,
            admm_tol: 1e-3,
            padding: 2.0,
            alpha: 2.0,
            beta: 1.0,
            eta: 0.01,
            sigma_center: 0.1,
            sigma_boundary: 0.05,
            feature: FeatureKind::Grayscale,
            cell_size: 1,
            bins: 9,
            template_size: 96,
            max_boundary_step: 0.2,
            min_scale: 0.8,
            max_scale: 1.2,
            disable_boundaries: false,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("padding", self.padding),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("sigma_center", self.sigma_center),
            ("sigma_boundary", self.sigma_boundary),
            ("admm_tol", self.admm_tol),
            ("rho", self.rho),
            ("gamma", self.gamma),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(IbccfError::InvalidParameter {
                    name: match name {
                        "padding" => "padding",
                        "alpha" => "alpha",
                        "beta" => "beta",
                        "sigma_center" => "sigma_center",
                        "sigma_boundary" => "sigma_boundary",
                        "admm_tol" => "admm_tol",
                        "rho" => "rho",
                        _ => "gamma",
                    },
                    why: format!("must be positive and finite, got {v}"),
                });
            }
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(IbccfError::InvalidParameter {
                name: "lambda",
                why: format!("must be non-negative, got {}", self.lambda),
            });
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(IbccfError::InvalidParameter {
                name: "mu",
                why: format!("must be non-negative, got {}", self.mu),
            });
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(IbccfError::InvalidParameter {
                name: "eta",
                why: format!("must lie in [0, 1], got {}", self.eta),
            });
        }
        if self.cell_size == 0 || self.admm_iters == 0 || self.template_size == 0 {
            return Err(IbccfError::InvalidParameter {
                name: "cell_size",
                why: "cell_size, admm_iters and template_size must be at least 1".into(),
            });
        }
        if self.feature == FeatureKind::GradientHist && self.bins == 0 {
            return Err(IbccfError::InvalidParameter {
                name: "bins",
                why: "gradient histograms need at least one bin".into(),
            });
        }
        if !(self.max_boundary_step > 0.0) || !self.max_boundary_step.is_finite() {
            return Err(IbccfError::InvalidParameter {
                name: "max_boundary_step",
                why: format!("must be positive, got {}", self.max_boundary_step),
            });
        }
        if !(self.min_scale > 0.0) || !(self.max_scale >= self.min_scale) || !(self.min_scale <= 1.0)
            || !(self.max_scale >= 1.0)
        {
            return Err(IbccfError::InvalidParameter {
                name: "min_scale",
                why: format!(
                    "need 0 < min_scale <= 1 <= max_scale, got {} and {}",
                    self.min_scale, self.max_scale
                ),
            });
        }
        Ok(())
    }
}

/// Which box point a region is centered on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RegionAnchor {
    Center,
    Edge(Side),
}

/// One region's fixed template: an integer window on the shared init
/// lattice plus the resampling and pooling applied to every crop.
#[derive(Debug, Clone)]
pub struct RegionTemplate {
    /// Window on the init lattice, image orientation (before any transpose).
    pub origin_row: i64,
    pub origin_col: i64,
    /// Template extents in lattice pixels, image orientation.
    pub ext_rows: usize,
    pub ext_cols: usize,
    /// Transpose the resampled crop before feature extraction.
    pub transpose: bool,
    /// Cell pooling applied after the optional transpose.
    pub cell_rows: usize,
    pub cell_cols: usize,
    anchor: RegionAnchor,
}

impl RegionTemplate {
    /// Template dims as seen by feature extraction (after the transpose).
    pub fn post_dims(&self) -> (usize, usize) {
        if self.transpose {
            (self.ext_cols, self.ext_rows)
        } else {
            (self.ext_rows, self.ext_cols)
        }
    }

    /// Feature grid dims after cell pooling.
    pub fn cell_dims(&self) -> (usize, usize) {
        let (r, c) = self.post_dims();
        (r / self.cell_rows, c / self.cell_cols)
    }
}

/// Windowed features of one crop plus the image-pixels-per-template-pixel
/// steps along the template axes (after the transpose), for mapping
/// detected displacements back to image coordinates.
#[derive(Debug, Clone)]
pub struct RegionPatch {
    pub features: FeatureMap,
    pub step_rows: f64,
    pub step_cols: f64,
}

/// All geometry frozen on the first frame: the shared lattice scale, the
/// five region templates, and the regression labels matching each template.
#[derive(Debug, Clone)]
pub struct TemplateGeometry {
    pub scale: f64,
    pub center: RegionTemplate,
    pub sides: SideArray<RegionTemplate>,
    pub center_label: Label2D,
    pub side_labels: SideArray<Label1D>,
    cfg: TrackerConfig,
}

fn to_cell_multiple(v: usize, cell: usize) -> usize {
    ((v as f64 / cell as f64).round() as usize).max(1) * cell
}

fn anchor_point(b: &CenterBox, anchor: RegionAnchor) -> (f64, f64) {
    match anchor {
        RegionAnchor::Center => (b.cx, b.cy),
        RegionAnchor::Edge(Side::Left) => (b.cx - 0.5 * b.width, b.cy),
        RegionAnchor::Edge(Side::Right) => (b.cx + 0.5 * b.width, b.cy),
        RegionAnchor::Edge(Side::Top) => (b.cx, b.cy - 0.5 * b.height),
        RegionAnchor::Edge(Side::Bottom) => (b.cx, b.cy + 0.5 * b.height),
    }
}

impl TemplateGeometry {
    pub fn new(b0: &BoundaryBox, cfg: &TrackerConfig) -> Result<Self> {
        cfg.validate()?;
        b0.validate()?;
        let c0 = b0.to_center();
        let long = (cfg.padding * c0.width).max(cfg.padding * c0.height);
        let scale = (cfg.template_size as f64 / long).min(1.0);
        let bs = CenterBox::new(c0.cx * scale, c0.cy * scale, c0.width * scale, c0.height * scale);
        let cell = cfg.cell_size;

        let spec_c = geometry::center_region_spec(&bs, cfg.padding)?;
        let ext_rows = to_cell_multiple(spec_c.rows, cell);
        let ext_cols = to_cell_multiple(spec_c.cols, cell);
        let center = RegionTemplate {
            origin_row: geometry::centered_extent(bs.cy, ext_rows),
            origin_col: geometry::centered_extent(bs.cx, ext_cols),
            ext_rows,
            ext_cols,
            transpose: false,
            cell_rows: cell,
            cell_cols: cell,
            anchor: RegionAnchor::Center,
        };

        let sides = SideArray::try_from_fn(|side| {
            let spec = geometry::boundary_region_spec(&bs, side, cfg.alpha, cfg.beta)?;
            // localization axis keeps pixel resolution, the cross axis is
            // rounded to a whole number of cells
            let (ext_rows, ext_cols) = if side.horizontal() {
                (to_cell_multiple(spec.rows, cell), spec.cols.max(2))
            } else {
                (spec.rows.max(2), to_cell_multiple(spec.cols, cell))
            };
            let (ax, ay) = anchor_point(&bs, RegionAnchor::Edge(side));
            Ok(RegionTemplate {
                origin_row: geometry::centered_extent(ay, ext_rows),
                origin_col: geometry::centered_extent(ax, ext_cols),
                ext_rows,
                ext_cols,
                transpose: !side.horizontal(),
                cell_rows: cell,
                cell_cols: 1,
                anchor: RegionAnchor::Edge(side),
            })
        })?;

        let (lr, lc) = center.cell_dims();
        let sigma_c = (cfg.sigma_center * (bs.width * bs.height).abs().sqrt() / cell as f64).max(0.5);
        let center_label = gaussian_label_2d(lr, lc, sigma_c)?;
        let side_labels = SideArray::try_from_fn(|side| {
            let dim = if side.horizontal() { bs.width } else { bs.height };
            let len = sides[side].cell_dims().1;
            gaussian_label_1d(len, (cfg.sigma_boundary * dim).max(0.5))
        })?;

        Ok(TemplateGeometry {
            scale,
            center,
            sides,
            center_label,
            side_labels,
            cfg: cfg.clone(),
        })
    }

    /// Crop spec around the current box for one region, on the image
    /// lattice. Extents track the box size, so they are the template extents
    /// scaled by the current-to-initial size ratio up to rounding.
    fn crop_spec(&self, b: &CenterBox, anchor: RegionAnchor) -> Result<RegionSpec> {
        match anchor {
            RegionAnchor::Center => geometry::center_region_spec(b, self.cfg.padding),
            RegionAnchor::Edge(side) => {
                geometry::boundary_region_spec(b, side, self.cfg.alpha, self.cfg.beta)
            }
        }
    }

    fn extract(&self, f: &Frame, b: &BoundaryBox, t: &RegionTemplate) -> Result<RegionPatch> {
        let bc = b.to_center();
        let spec = self.crop_spec(&bc, t.anchor)?;
        let crop = f.crop(&spec)?;
        let resized = frame::resample(&crop, t.ext_rows, t.ext_cols)?;
        let patch = if t.transpose { resized.t().to_owned() } else { resized };
        let fm = features::extract_stack(&patch, self.cfg.feature, t.cell_rows, t.cell_cols, self.cfg.bins)?;
        let windowed = if t.anchor == RegionAnchor::Center {
            features::apply_cosine_window(&fm)
        } else {
            features::apply_cosine_window_1d(&fm)
        };
        let (step_rows, step_cols) = if t.transpose {
            (
                spec.cols as f64 / t.ext_cols as f64,
                spec.rows as f64 / t.ext_rows as f64,
            )
        } else {
            (
                spec.rows as f64 / t.ext_rows as f64,
                spec.cols as f64 / t.ext_cols as f64,
            )
        };
        Ok(RegionPatch { features: windowed, step_rows, step_cols })
    }

    pub fn extract_center(&self, f: &Frame, b: &BoundaryBox) -> Result<RegionPatch> {
        self.extract(f, b, &self.center)
    }

    pub fn extract_side(&self, f: &Frame, b: &BoundaryBox, side: Side) -> Result<RegionPatch> {
        self.extract(f, b, &self.sides[side])
    }

    /// Features plus labels for all five filters at one box.
    pub fn training_data(&self, f: &Frame, b: &BoundaryBox) -> Result<TrainingData> {
        let center = self.extract_center(f, b)?;
        let boundaries = SideArray::try_from_fn(|side| {
            Ok(BoundaryData {
                x: self.extract_side(f, b, side)?.features,
                y: self.side_labels[side].clone(),
            })
        })?;
        Ok(TrainingData {
            x: center.features,
            y: self.center_label.clone(),
            boundaries,
            lambda: self.cfg.lambda,
        })
    }

    /// Pairs every center-filter cell inside a boundary window with the
    /// boundary-filter cell at the same lattice position. All regions live
    /// on one lattice with a common pitch, so the pairing is one-to-one.
    pub fn build_projection(&self) -> Result<CommonProjection> {
        let channels = self.cfg.feature.channels(self.cfg.bins);
        let (crows, ccols) = self.center.cell_dims();
        let cellf = self.cfg.cell_size as f64;
        let sides = SideArray::try_from_fn(|side| {
            let t = &self.sides[side];
            let r0 = (self.center.origin_row.max(t.origin_row)) as f64;
            let r1 = ((self.center.origin_row + self.center.ext_rows as i64)
                .min(t.origin_row + t.ext_rows as i64)) as f64;
            let c0 = (self.center.origin_col.max(t.origin_col)) as f64;
            let c1 = ((self.center.origin_col + self.center.ext_cols as i64)
                .min(t.origin_col + t.ext_cols as i64)) as f64;
            if r0 >= r1 || c0 >= c1 {
                return Err(IbccfError::InitFailure(format!(
                    "{} region does not meet the center region",
                    side.name()
                )));
            }
            let (post_rows, post_cols) = t.post_dims();
            let pooled_rows = post_rows / t.cell_rows;
            let mut center_idx = Vec::new();
            let mut boundary_idx = Vec::new();
            for ch in 0..channels {
                for rr in 0..crows {
                    for kk in 0..ccols {
                        let mid_row =
                            self.center.origin_row as f64 + rr as f64 * cellf + 0.5 * (cellf - 1.0);
                        let mid_col =
                            self.center.origin_col as f64 + kk as f64 * cellf + 0.5 * (cellf - 1.0);
                        if mid_row < r0 || mid_row >= r1 || mid_col < c0 || mid_col >= c1 {
                            continue;
                        }
                        let dr = mid_row - t.origin_row as f64;
                        let dc = mid_col - t.origin_col as f64;
                        let (pr, pc) = if t.transpose { (dc, dr) } else { (dr, dc) };
                        let row_cell = (pr / t.cell_rows as f64).floor() as usize;
                        let col = (pc.round() as i64).clamp(0, post_cols as i64 - 1) as usize;
                        center_idx.push((ch * crows + rr) * ccols + kk);
                        boundary_idx.push((ch * pooled_rows + row_cell) * post_cols + col);
                    }
                }
            }
            Ok(SideMap {
                center_idx,
                boundary_idx,
                boundary_shape: (channels * pooled_rows, post_cols),
            })
        })?;
        CommonProjection::new((channels, crows, ccols), sides)
    }
}

/// What one [`Tracker::step`] did.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub bbox: BoundaryBox,
    /// Center translation applied, image pixels `(dx, dy)`.
    pub center_displacement: (f64, f64),
    pub center_peak: f64,
    /// Signed shift applied to each boundary, after clamping.
    pub boundary_shift: [f64; 4],
    /// Center/boundary angle over each common region for the fresh jointly
    /// trained filters. `None` when boundaries are disabled or the angle is
    /// undefined.
    pub angles: [Option<f64>; 4],
    pub admm: Option<AdmmDiagnostics>,
}

pub struct Tracker {
    cfg: TrackerConfig,
    geom: TemplateGeometry,
    proj: Option<CommonProjection>,
    center: CenterFilter,
    boundaries: Option<SideArray<BoundaryFilter>>,
    bbox: BoundaryBox,
    frame_rows: usize,
    frame_cols: usize,
}

fn check_in_frame(b: &BoundaryBox, rows: usize, cols: usize) -> Result<()> {
    if b.right <= 0.0 || b.left >= cols as f64 || b.bottom <= 0.0 || b.top >= rows as f64 {
        return Err(IbccfError::OutOfFrame);
    }
    Ok(())
}

impl Tracker {
    /// Trains the initial model on `frame` at `bbox`.
    pub fn init(frame: &Frame, bbox: &BoundaryBox, cfg: TrackerConfig) -> Result<Self> {
        cfg.validate()?;
        bbox.validate()?;
        if bbox.width() < 2.0 || bbox.height() < 2.0 {
            return Err(IbccfError::InvalidBox(format!(
                "target {}x{} is too small to track",
                bbox.width(),
                bbox.height()
            )));
        }
        let (frame_rows, frame_cols) = frame.data.dim();
        check_in_frame(bbox, frame_rows, frame_cols)?;
        let geom = TemplateGeometry::new(bbox, &cfg)?;
        let data = geom.training_data(frame, bbox)?;
        if cfg.disable_boundaries {
            let center = cf::train_center_filter(&data.x, &data.y, cfg.lambda)?;
            Ok(Tracker {
                cfg,
                geom,
                proj: None,
                center,
                boundaries: None,
                bbox: *bbox,
                frame_rows,
                frame_cols,
            })
        } else {
            let proj = geom.build_projection()?;
            let admm_cfg = AdmmConfig {
                mu: cfg.mu,
                rho: cfg.rho,
                gamma: cfg.gamma,
                max_iters: cfg.admm_iters,
                tol: cfg.admm_tol,
            };
            let sol = admm::run_admm(&data, &proj, &admm_cfg)?;
            Ok(Tracker {
                cfg,
                geom,
                proj: Some(proj),
                center: sol.center,
                boundaries: Some(sol.boundaries),
                bbox: *bbox,
                frame_rows,
                frame_cols,
            })
        }
    }

    pub fn bbox(&self) -> BoundaryBox {
        self.bbox
    }

    pub fn geometry(&self) -> &TemplateGeometry {
        &self.geom
    }

    fn admm_config(&self) -> AdmmConfig {
        AdmmConfig {
            mu: self.cfg.mu,
            rho: self.cfg.rho,
            gamma: self.cfg.gamma,
            max_iters: self.cfg.admm_iters,
            tol: self.cfg.admm_tol,
        }
    }

    /// Localizes the target on `frame`, refines the box, retrains and
    /// blends the model, and moves the tracker to the new box.
    pub fn step(&mut self, frame: &Frame) -> Result<StepReport> {
        if frame.data.dim() != (self.frame_rows, self.frame_cols) {
            return Err(IbccfError::ShapeMismatch(format!(
                "frame {:?} vs sequence {:?}",
                frame.data.dim(),
                (self.frame_rows, self.frame_cols)
            )));
        }

        let cp = self.geom.extract_center(frame, &self.bbox)?;
        let resp = cf::detect_center(&self.center, &cp.features)?;
        let dy = resp.displacement.0 as f64 * self.geom.center.cell_rows as f64 * cp.step_rows;
        let dx = resp.displacement.1 as f64 * self.geom.center.cell_cols as f64 * cp.step_cols;
        let c0 = self.bbox.to_center();
        let translated = CenterBox::new(c0.cx + dx, c0.cy + dy, c0.width, c0.height).to_boundary()?;

        let mut shifts = [0.0f64; 4];
        let refined = if let Some(filters) = &self.boundaries {
            let mut edges = [translated.left, translated.right, translated.top, translated.bottom];
            for side in Side::ALL {
                let sp = self.geom.extract_side(frame, &translated, side)?;
                let r = cf::detect_boundary(&filters[side], &sp.features)?;
                let extent = if side.horizontal() { translated.width() } else { translated.height() };
                let limit = self.cfg.max_boundary_step * extent;
                let shift = (r.displacement as f64 * sp.step_cols).clamp(-limit, limit);
                shifts[side.index()] = shift;
                edges[side.index()] = translated.side(side) + shift;
            }
            // keep the refined midpoints but bound the size change
            let clamp_dim = |lo: f64, hi: f64, base: f64| {
                let mid = 0.5 * (lo + hi);
                let ext = (hi - lo)
                    .clamp(self.cfg.min_scale * base, self.cfg.max_scale * base)
                    .max(2.0);
                (mid - 0.5 * ext, mid + 0.5 * ext)
            };
            let (l, r) = clamp_dim(edges[0], edges[1], translated.width());
            let (t, b) = clamp_dim(edges[2], edges[3], translated.height());
            BoundaryBox::new(l, r, t, b)?
        } else {
            translated
        };
        check_in_frame(&refined, self.frame_rows, self.frame_cols)?;

        let data = self.geom.training_data(frame, &refined)?;
        let mut angles = [None; 4];
        let diagnostics = if self.cfg.disable_boundaries {
            let fresh = cf::train_center_filter(&data.x, &data.y, self.cfg.lambda)?;
            self.center.update(&fresh, self.cfg.eta)?;
            None
        } else {
            let proj = self.proj.as_ref().expect("projection exists with boundaries enabled");
            let sol = admm::run_admm(&data, proj, &self.admm_config())?;
            for side in Side::ALL {
                angles[side.index()] =
                    admm::common_angle(&sol.state.w, &sol.state.wk[side], proj, side).ok();
            }
            self.center.update(&sol.center, self.cfg.eta)?;
            let filters = self.boundaries.as_mut().expect("boundary filters exist");
            for side in Side::ALL {
                filters[side].update(&sol.boundaries[side], self.cfg.eta)?;
            }
            Some(sol.diagnostics)
        };

        self.bbox = refined;
        Ok(StepReport {
            bbox: refined,
            center_displacement: (dx, dy),
            center_peak: resp.peak_value,
            boundary_shift: shifts,
            angles,
            admm: diagnostics,
        })
    }

    /// Center/boundary angles of the current blended model.
    pub fn angle_report(&self) -> [Option<f64>; 4] {
        let mut out = [None; 4];
        if let (Some(filters), Some(proj)) = (&self.boundaries, &self.proj) {
            let w = self.center.spatial();
            for side in Side::ALL {
                out[side.index()] =
                    admm::common_angle(&w, &filters[side].spatial(), proj, side).ok();
            }
        }
        out
    }
}
