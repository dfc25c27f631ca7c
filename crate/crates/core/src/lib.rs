//! Behavioral simulator and design-analysis toolkit for an integrating
//! sub-sampling phase-locked loop (ISSPLL).
//!
//! The loop is simulated event by event at the reference rate. Each reference
//! edge opens a sampling pulse. The integrating phase detector converts the
//! position of the VCO transition inside that pulse into charge on the merged
//! `C_S`/`R1`/`C1` network, and the network voltage tunes a ring-oscillator
//! VCO. A digital FLL performs coarse acquisition first and then disengages.
//!
//! Module map:
//!
//! * [`model`]: configuration, trace records, validation
//! * [`config_file`]: INI-style configuration text
//! * [`stimulus`]: reference edges and pulse windows
//! * [`oscillator`]: the 32-phase VCO
//! * [`detector`]: integrating phase detector and loop filter
//! * [`fll`]: coarse frequency-locked loop
//! * [`engine`]: transient runs, lock detection, phase synthesis
//! * [`analysis`]: PSD, jitter, spur and figure-of-merit arithmetic
//! * [`linear`]: small-signal s-domain loop analysis
//! * [`report`], [`trace_io`], [`sweep`]: summaries, CSV, parameter sweeps

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config_file;
pub mod detector;
pub mod engine;
pub mod fll;
pub mod linear;
pub mod model;
pub mod oscillator;
pub mod report;
pub mod stimulus;
pub mod sweep;
pub mod trace_io;

mod error;

pub use error::{Error, Result};
pub use model::{CycleRecord, NoiseSpec, SimConfig, Violation};
