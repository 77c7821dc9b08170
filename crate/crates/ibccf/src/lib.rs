//! Visual tracking with a joint center and boundary correlation filter model.
//!
//! A 2D correlation filter localizes the target center while four 1D filters
//! localize the left, right, top and bottom boundaries, so width and height
//! are estimated directly instead of by scale search. The five filters are
//! trained jointly with a near-orthogonality penalty on the region they share,
//! solved by ADMM with closed-form subproblem updates.
//!
//! Quick start:
//!
//! ```
//! use ibccf::{eval, tracker::TrackerConfig};
//!
//! let spec = eval::SynthSpec::new("demo", 120, 160)
//!     .schedule_linear(ibccf::CenterBox::new(80.0, 60.0, 24.0, 18.0), 8, [1.0, 0.5, 0.4, 0.0])
//!     .seed(7);
//! let seq = eval::synth_sequence(&spec).unwrap();
//! let record = eval::run_ope(&seq, &TrackerConfig::default()).unwrap();
//! assert_eq!(record.boxes.len(), seq.len());
//! ```

// parameter checks are written `!(x >= 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admm;
pub mod cf;
pub mod error;
pub mod eval;
pub mod features;
pub mod fft;
pub mod frame;
pub mod geometry;
pub mod oracle;
pub mod tracker;

pub use error::{IbccfError, Result};
pub use frame::Frame;
pub use geometry::{BoundaryBox, CenterBox, Side};

/// Caps the size of the global worker pool used for the per-side boundary
/// updates. Returns an error if the pool was already initialized.
pub fn set_thread_cap(threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build_global()
        .map_err(|e| IbccfError::InvalidParameter {
            name: "threads",
            why: e.to_string(),
        })
}
