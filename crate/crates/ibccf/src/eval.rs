//! One-pass evaluation, overlap metrics and synthetic test sequences.
//!
//! [`run_ope`] initializes a tracker on the first ground-truth box and runs
//! it once over the rest of the sequence, never re-initializing. A step
//! error ends the run early; the record keeps the boxes produced so far and
//! carries the failure, and the metrics treat missing frames as misses.
//!
//! The synthetic generator renders a textured rectangle with a dark rim and
//! a bright inner ring over a smooth random background, following a scripted
//! box schedule, with Gaussian pixel noise on top. All randomness comes from
//! one seeded stream whose consumption does not depend on the schedule, so
//! two specs differing only in motion get identical backgrounds and noise.

use crate::error::{IbccfError, Result};
use crate::frame::Frame;
use crate::geometry::{self, BoundaryBox, CenterBox};
use crate::tracker::{StepReport, Tracker, TrackerConfig};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Frames plus per-frame ground truth, validated to be consistent.
#[derive(Debug, Clone)]
pub struct Sequence {
    pub name: String,
    pub frames: Vec<Frame>,
    pub gt: Vec<BoundaryBox>,
}

impl Sequence {
    pub fn new(name: impl Into<String>, frames: Vec<Frame>, gt: Vec<BoundaryBox>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(IbccfError::InvalidSequence(format!(
                "need at least 2 frames, got {}",
                frames.len()
            )));
        }
        if frames.len() != gt.len() {
            return Err(IbccfError::InvalidSequence(format!(
                "{} frames but {} ground-truth boxes",
                frames.len(),
                gt.len()
            )));
        }
        let dims = frames[0].data.dim();
        if frames.iter().any(|f| f.data.dim() != dims) {
            return Err(IbccfError::InvalidSequence("frame dimensions change mid-sequence".into()));
        }
        for (i, b) in gt.iter().enumerate() {
            b.validate().map_err(|e| {
                IbccfError::InvalidSequence(format!("ground-truth box {i}: {e}"))
            })?;
        }
        Ok(Sequence { name: name.into(), frames, gt })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Everything recorded about one evaluated frame.
#[derive(Debug, Clone)]
pub struct FrameDiag {
    /// Frame index within the sequence (1-based relative to the init frame
    /// at index 0).
    pub index: usize,
    pub report: StepReport,
}

/// Output of [`run_ope`]. `boxes[0]` is the ground-truth init box; a failed
/// run stops early, so `boxes` may be shorter than the sequence.
#[derive(Debug, Clone)]
pub struct TrackRecord {
    pub boxes: Vec<BoundaryBox>,
    pub diags: Vec<FrameDiag>,
    pub failure: Option<(usize, String)>,
}

/// Runs the tracker once over the sequence from the first ground-truth box.
pub fn run_ope(seq: &Sequence, cfg: &TrackerConfig) -> Result<TrackRecord> {
    let mut tracker = Tracker::init(&seq.frames[0], &seq.gt[0], cfg.clone())?;
    let mut boxes = vec![seq.gt[0]];
    let mut diags = Vec::with_capacity(seq.len().saturating_sub(1));
    let mut failure = None;
    for (i, frame) in seq.frames.iter().enumerate().skip(1) {
        match tracker.step(frame) {
            Ok(report) => {
                boxes.push(report.bbox);
                diags.push(FrameDiag { index: i, report });
            }
            Err(e) => {
                failure = Some((i, e.to_string()));
                break;
            }
        }
    }
    Ok(TrackRecord { boxes, diags, failure })
}

/// Fraction of evaluated frames whose overlap with the ground truth exceeds
/// `threshold` (strictly). The init frame is excluded; frames missing from a
/// truncated run count as misses.
pub fn overlap_precision(gt: &[BoundaryBox], boxes: &[BoundaryBox], threshold: f64) -> f64 {
    if gt.len() < 2 {
        return 0.0;
    }
    let evaluated = gt.len() - 1;
    let hits = gt
        .iter()
        .zip(boxes.iter())
        .skip(1)
        .filter(|(g, b)| geometry::iou(g, b) > threshold)
        .count();
    hits as f64 / evaluated as f64
}

/// Overlap precision at 21 evenly spaced thresholds from 0 to 1.
pub fn success_curve(gt: &[BoundaryBox], boxes: &[BoundaryBox]) -> Vec<(f64, f64)> {
    (0..=20)
        .map(|i| {
            let thr = i as f64 / 20.0;
            (thr, overlap_precision(gt, boxes, thr))
        })
        .collect()
}

/// Area under the success curve: the mean of its precision values.
pub fn auc(curve: &[(f64, f64)]) -> f64 {
    if curve.is_empty() {
        return 0.0;
    }
    curve.iter().map(|(_, op)| op).sum::<f64>() / curve.len() as f64
}

/// Script for one synthetic sequence.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub schedule: Vec<CenterBox>,
    pub seed: u64,
    /// Standard deviation of the per-pixel Gaussian noise.
    pub noise: f64,
}

impl SynthSpec {
    pub fn new(name: impl Into<String>, rows: usize, cols: usize) -> Self {
        SynthSpec { name: name.into(), rows, cols, schedule: Vec::new(), seed: 0, noise: 2.0 }
    }

    /// Constant per-frame deltas `[dx, dy, dw, dh]` applied to `start`.
    pub fn schedule_linear(mut self, start: CenterBox, frames: usize, vel: [f64; 4]) -> Self {
        self.schedule = (0..frames)
            .map(|t| {
                let t = t as f64;
                CenterBox::new(
                    start.cx + t * vel[0],
                    start.cy + t * vel[1],
                    start.width + t * vel[2],
                    start.height + t * vel[3],
                )
            })
            .collect();
        self
    }

    /// Linear translation `[dx, dy]` with geometric size change: frame `t`
    /// has width `w * wr^t` and height `h * hr^t`.
    pub fn schedule_geometric(
        mut self,
        start: CenterBox,
        frames: usize,
        vel: [f64; 2],
        rates: [f64; 2],
    ) -> Self {
        self.schedule = (0..frames)
            .map(|t| {
                let tf = t as f64;
                CenterBox::new(
                    start.cx + tf * vel[0],
                    start.cy + tf * vel[1],
                    start.width * rates[0].powi(t as i32),
                    start.height * rates[1].powi(t as i32),
                )
            })
            .collect();
        self
    }

    pub fn schedule(mut self, boxes: Vec<CenterBox>) -> Self {
        self.schedule = boxes;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn noise(mut self, sd: f64) -> Self {
        self.noise = sd;
        self
    }
}

const TEX_CELLS: usize = 12;
const BG_CELL: usize = 8;

fn bilinear_grid(grid: &Array2<f64>, r: f64, c: f64) -> f64 {
    let (gr, gc) = grid.dim();
    let r = r.clamp(0.0, gr as f64 - 1.0);
    let c = c.clamp(0.0, gc as f64 - 1.0);
    let r0 = (r.floor() as usize).min(gr - 1);
    let c0 = (c.floor() as usize).min(gc - 1);
    let r1 = (r0 + 1).min(gr - 1);
    let c1 = (c0 + 1).min(gc - 1);
    let tr = r - r0 as f64;
    let tc = c - c0 as f64;
    grid[(r0, c0)] * (1.0 - tr) * (1.0 - tc)
        + grid[(r1, c0)] * tr * (1.0 - tc)
        + grid[(r0, c1)] * (1.0 - tr) * tc
        + grid[(r1, c1)] * tr * tc
}

/// Renders the scripted sequence. Every box must lie fully inside the
/// frame; ground truth is the exact floating-point schedule.
pub fn synth_sequence(spec: &SynthSpec) -> Result<Sequence> {
    if spec.rows < 16 || spec.cols < 16 {
        return Err(IbccfError::SynthFailure(format!(
            "frame {}x{} is too small",
            spec.rows, spec.cols
        )));
    }
    if spec.schedule.len() < 2 {
        return Err(IbccfError::SynthFailure(format!(
            "schedule has {} frames, need at least 2",
            spec.schedule.len()
        )));
    }
    if !(spec.noise >= 0.0) || !spec.noise.is_finite() {
        return Err(IbccfError::SynthFailure(format!("bad noise level {}", spec.noise)));
    }
    let mut gt = Vec::with_capacity(spec.schedule.len());
    for (t, b) in spec.schedule.iter().enumerate() {
        let bb = b.to_boundary().map_err(|e| {
            IbccfError::SynthFailure(format!("frame {t}: {e}"))
        })?;
        if bb.width() < 2.0 || bb.height() < 2.0 {
            return Err(IbccfError::SynthFailure(format!(
                "frame {t}: target {}x{} is too small",
                bb.width(),
                bb.height()
            )));
        }
        if bb.left < 0.0 || bb.top < 0.0 || bb.right > spec.cols as f64 || bb.bottom > spec.rows as f64 {
            return Err(IbccfError::SynthFailure(format!(
                "frame {t}: target leaves the frame"
            )));
        }
        gt.push(bb);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let bg_grid = Array2::from_shape_fn(
        (spec.rows / BG_CELL + 2, spec.cols / BG_CELL + 2),
        |_| rng.gen_range(40.0..180.0),
    );
    let background = Array2::from_shape_fn((spec.rows, spec.cols), |(r, c)| {
        bilinear_grid(&bg_grid, r as f64 / BG_CELL as f64, c as f64 / BG_CELL as f64)
    });

    // fixed texture: random interior, dark rim, bright ring inside the rim
    let mut texture = Array2::from_shape_fn((TEX_CELLS, TEX_CELLS), |_| rng.gen_range(60.0..220.0));
    for i in 0..TEX_CELLS {
        for j in 0..TEX_CELLS {
            let ring = i.min(j).min(TEX_CELLS - 1 - i).min(TEX_CELLS - 1 - j);
            if ring == 0 {
                texture[(i, j)] = 20.0;
            } else if ring == 1 {
                texture[(i, j)] = 235.0;
            }
        }
    }

    let normal = Normal::new(0.0, spec.noise.max(f64::MIN_POSITIVE)).map_err(|e| {
        IbccfError::SynthFailure(format!("noise distribution: {e}"))
    })?;
    let mut frames = Vec::with_capacity(gt.len());
    for bb in &gt {
        let mut canvas = background.clone();
        let r0 = bb.top.floor().max(0.0) as usize;
        let r1 = (bb.bottom.ceil() as usize).min(spec.rows);
        let c0 = bb.left.floor().max(0.0) as usize;
        let c1 = (bb.right.ceil() as usize).min(spec.cols);
        for r in r0..r1 {
            for c in c0..c1 {
                let px = c as f64 + 0.5;
                let py = r as f64 + 0.5;
                if px < bb.left || px >= bb.right || py < bb.top || py >= bb.bottom {
                    continue;
                }
                let u = (py - bb.top) / bb.height() * TEX_CELLS as f64 - 0.5;
                let v = (px - bb.left) / bb.width() * TEX_CELLS as f64 - 0.5;
                canvas[(r, c)] = bilinear_grid(&texture, u, v);
            }
        }
        // the noise stream covers the whole frame regardless of the box, so
        // it is identical across schedules sharing a seed
        let mut pixels = Vec::with_capacity(spec.rows * spec.cols);
        for v in canvas.iter() {
            let noisy = if spec.noise > 0.0 { v + normal.sample(&mut rng) } else { *v };
            pixels.push(noisy.round().clamp(0.0, 255.0) as u8);
        }
        frames.push(Frame::from_luma(spec.rows, spec.cols, &pixels)?);
    }

    Sequence::new(spec.name.clone(), frames, gt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn metric_fixture() -> (Vec<BoundaryBox>, Vec<BoundaryBox>) {
        let gt = vec![BoundaryBox::from_ltwh(0.0, 0.0, 10.0, 10.0).unwrap(); 4];
        // overlaps with the ground truth: exactly 0.2, 0.6, 0.7
        let boxes = vec![
            gt[0],
            BoundaryBox::from_ltwh(0.0, 0.0, 2.0, 10.0).unwrap(),
            BoundaryBox::from_ltwh(0.0, 0.0, 6.0, 10.0).unwrap(),
            BoundaryBox::from_ltwh(0.0, 0.0, 7.0, 10.0).unwrap(),
        ];
        (gt, boxes)
    }

    #[test]
    fn overlap_precision_hand_values() {
        let (gt, boxes) = metric_fixture();
        assert_abs_diff_eq!(overlap_precision(&gt, &boxes, 0.5), 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(overlap_precision(&gt, &boxes, 0.1), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(overlap_precision(&gt, &boxes, 0.65), 1.0 / 3.0, epsilon = 1e-12);
        // the comparison is strict, so a threshold at an attained value
        // does not count that frame
        assert_abs_diff_eq!(overlap_precision(&gt, &boxes, 0.7), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn truncated_runs_count_missing_frames_as_misses() {
        let (gt, boxes) = metric_fixture();
        let truncated = &boxes[..2];
        assert_abs_diff_eq!(overlap_precision(&gt, truncated, 0.1), 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(overlap_precision(&gt, &boxes[..1], 0.1), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn success_curve_shape_and_auc() {
        let (gt, boxes) = metric_fixture();
        let curve = success_curve(&gt, &boxes);
        assert_eq!(curve.len(), 21);
        assert_abs_diff_eq!(curve[0].0, 0.0);
        assert_abs_diff_eq!(curve[20].0, 1.0);
        for pair in curve.windows(2) {
            assert!(pair[1].1 <= pair[0].1 + 1e-12, "curve must not increase");
        }
        // 4 thresholds below 0.2 see every frame, 8 see two, 2 see one
        assert_abs_diff_eq!(auc(&curve), 10.0 / 21.0, epsilon = 1e-12);
    }

    #[test]
    fn sequence_validation_rejects_malformed_input() {
        let f = |rows| Frame::new(Array2::zeros((rows, 24)));
        let b = BoundaryBox::from_ltwh(2.0, 2.0, 8.0, 8.0).unwrap();
        assert!(matches!(
            Sequence::new("s", vec![f(24)], vec![b]),
            Err(IbccfError::InvalidSequence(_))
        ));
        assert!(matches!(
            Sequence::new("s", vec![f(24), f(24)], vec![b]),
            Err(IbccfError::InvalidSequence(_))
        ));
        assert!(matches!(
            Sequence::new("s", vec![f(24), f(20)], vec![b, b]),
            Err(IbccfError::InvalidSequence(_))
        ));
        assert!(Sequence::new("s", vec![f(24), f(24)], vec![b, b]).is_ok());
    }

    #[test]
    fn synth_is_deterministic_and_matches_the_schedule() {
        let spec = SynthSpec::new("det", 80, 100)
            .schedule_linear(CenterBox::new(50.0, 40.0, 16.0, 12.0), 5, [2.0, 1.0, 0.5, 0.0])
            .seed(3);
        let a = synth_sequence(&spec).unwrap();
        let b = synth_sequence(&spec).unwrap();
        assert_eq!(a.len(), 5);
        for (fa, fb) in a.frames.iter().zip(b.frames.iter()) {
            assert_eq!(fa.data, fb.data);
        }
        for (t, bb) in a.gt.iter().enumerate() {
            let c = bb.to_center();
            assert_abs_diff_eq!(c.cx, 50.0 + 2.0 * t as f64, epsilon = 1e-12);
            assert_abs_diff_eq!(c.width, 16.0 + 0.5 * t as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn synth_noise_stream_is_schedule_independent() {
        let a = synth_sequence(
            &SynthSpec::new("a", 64, 64)
                .schedule_linear(CenterBox::new(20.0, 20.0, 10.0, 10.0), 3, [0.0; 4])
                .seed(11),
        )
        .unwrap();
        let b = synth_sequence(
            &SynthSpec::new("b", 64, 64)
                .schedule_linear(CenterBox::new(44.0, 44.0, 10.0, 10.0), 3, [0.0; 4])
                .seed(11),
        )
        .unwrap();
        // far away from both targets the rendered pixels must agree exactly
        for t in 0..3 {
            assert_eq!(a.frames[t].data[(2, 2)], b.frames[t].data[(2, 2)]);
            assert_eq!(a.frames[t].data[(2, 61)], b.frames[t].data[(2, 61)]);
            assert_eq!(a.frames[t].data[(33, 2)], b.frames[t].data[(33, 2)]);
        }
    }

    #[test]
    fn synth_rejects_schedules_leaving_the_frame() {
        let spec = SynthSpec::new("out", 64, 64)
            .schedule_linear(CenterBox::new(56.0, 32.0, 12.0, 12.0), 6, [2.0, 0.0, 0.0, 0.0]);
        assert!(matches!(synth_sequence(&spec), Err(IbccfError::SynthFailure(_))));
        let tiny = SynthSpec::new("tiny", 64, 64)
            .schedule_linear(CenterBox::new(32.0, 32.0, 1.0, 8.0), 3, [0.0; 4]);
        assert!(matches!(synth_sequence(&tiny), Err(IbccfError::SynthFailure(_))));
    }

    #[test]
    fn ope_tracks_a_simple_synthetic_sequence() {
        let spec = SynthSpec::new("ope", 96, 128)
            .schedule_linear(CenterBox::new(64.0, 48.0, 18.0, 14.0), 6, [1.5, 1.0, 0.0, 0.0])
            .seed(5);
        let seq = synth_sequence(&spec).unwrap();
        let record = run_ope(&seq, &TrackerConfig::default()).unwrap();
        assert_eq!(record.boxes.len(), seq.len());
        assert!(record.failure.is_none());
        assert_eq!(record.diags.len(), seq.len() - 1);
        assert_eq!(record.boxes[0].to_ltwh(), seq.gt[0].to_ltwh());
        let op = overlap_precision(&seq.gt, &record.boxes, 0.5);
        assert!(op >= 0.8, "overlap precision {op}");
    }

    #[test]
    fn ope_flags_failures_and_truncates() {
        // a sequence doctored behind the constructor: the third frame has
        // different dimensions, which the tracker rejects at step time
        let spec = SynthSpec::new("trunc", 64, 64)
            .schedule_linear(CenterBox::new(32.0, 32.0, 12.0, 12.0), 4, [0.5, 0.0, 0.0, 0.0])
            .seed(9);
        let mut seq = synth_sequence(&spec).unwrap();
        seq.frames[2] = Frame::new(Array2::zeros((32, 32)));
        let record = run_ope(&seq, &TrackerConfig::default()).unwrap();
        let (idx, ref what) = record.failure.clone().expect("failure recorded");
        assert_eq!(idx, 2);
        assert!(!what.is_empty());
        assert_eq!(record.boxes.len(), 2);
        assert!(overlap_precision(&seq.gt, &record.boxes, 0.1) <= 1.0 / 3.0 + 1e-12);
    }
}
