//! Gait-phase detection from a single surface-EMG channel.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every pure stage of
//! the pipeline:
//!
//! ```text
//! raw rectus-femoris EMG ──► band-pass 10–300 Hz ──► max-abs normalize ──┐
//!                                                                       ├─► moving windows ──► (ZC, MAV, σ, MAD)
//! knee goniometer ──► low-pass ──► extrema ──► stance/swing labels ─────┘        │
//!                                                                                 ▼
//!                                     standard scaling ─► classifier ─► ROC-AUC over leave-one-subject-out folds
//! ```
//!
//! File formats, configuration, the CLI and parallel sweep execution live in
//! the `gaitphase` companion crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod classifiers;
pub mod dataset;
pub mod dsp;
pub mod error;
pub mod evaluation;
pub mod labeling;
pub mod preprocess;
pub mod units;
pub mod windowing;

mod math;
mod seed;

pub use error::{Error, Result};
