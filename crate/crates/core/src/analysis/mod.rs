//! Spectral post-processing: phase-noise PSD, integrated jitter, reference
//! spurs and the figure-of-merit arithmetic.

mod fom;
mod jitter;
mod psd;
mod spur;

pub use fom::{fom_ja, FomInputs, FomResult};
pub use jitter::integrate_jitter;
pub use psd::{estimate_psd, SpectrumEstimate, L_FLOOR_DBCHZ};
pub use spur::{spur_level, spur_level_raw, SpurMeasurement, SPUR_HALF_WIDTH_BINS};
