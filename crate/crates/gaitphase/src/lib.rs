//! Std-side companion of `gaitphase-core`: dataset ingest, INI
//! configuration, parallel sweeps, report files and the `gaitphase` CLI.

pub mod commands;
pub mod config;
pub mod ingest;
pub mod report;
pub mod runner;
pub mod synthetic;

use std::time::Instant;

use gaitphase_core::evaluation::Clock;

/// Wall clock for replay latency measurement.
pub struct InstantClock(Instant);

impl InstantClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for InstantClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for InstantClock {
    fn now_ns(&self) -> u64 {
        self.0.elapsed().as_nanos() as u64
    }
}
