//! Shared fixtures for the integration suites: a deterministic textured
//! frame and the standard 32x32 joint-training instance built through the
//! real template-geometry pipeline (16x16 box, 2x padding, grayscale).

use ibccf::admm::{CommonProjection, TrainingData};
use ibccf::tracker::{TemplateGeometry, TrackerConfig};
use ibccf::{BoundaryBox, Frame};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth value-noise frame so crops look like natural image patches.
pub fn textured_frame(rows: usize, cols: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gr = rows / 4 + 2;
    let gc = cols / 4 + 2;
    let grid = Array2::from_shape_fn((gr, gc), |_| rng.gen_range(0.0..255.0));
    let data = Array2::from_shape_fn((rows, cols), |(r, c)| {
        let fr = r as f64 / 4.0;
        let fc = c as f64 / 4.0;
        let (r0, c0) = (fr.floor() as usize, fc.floor() as usize);
        let (tr, tc) = (fr - r0 as f64, fc - c0 as f64);
        let v = grid[(r0, c0)] * (1.0 - tr) * (1.0 - tc)
            + grid[(r0 + 1, c0)] * tr * (1.0 - tc)
            + grid[(r0, c0 + 1)] * (1.0 - tr) * tc
            + grid[(r0 + 1, c0 + 1)] * tr * tc;
        v.round()
    });
    Frame::new(data)
}

pub fn fixture_box() -> BoundaryBox {
    BoundaryBox::new(40.0, 56.0, 40.0, 56.0).unwrap()
}

pub fn fixture_cfg() -> TrackerConfig {
    TrackerConfig::default()
}

/// The standard fixture: a 32x32 center template with its four boundary
/// templates and projection, features taken from a seeded textured frame.
pub fn fixture_instance(seed: u64) -> (TrainingData, CommonProjection) {
    let frame = textured_frame(96, 96, seed);
    let geom = TemplateGeometry::new(&fixture_box(), &fixture_cfg()).unwrap();
    assert_eq!((geom.center.ext_rows, geom.center.ext_cols), (32, 32));
    let data = geom.training_data(&frame, &fixture_box()).unwrap();
    let proj = geom.build_projection().unwrap();
    (data, proj)
}
