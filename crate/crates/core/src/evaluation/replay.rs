use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::classifiers::TrainedModel;
use crate::dataset::SampledSignal;
use crate::error::{Error, Result};
use crate::units::samples_to_ms;
use crate::windowing::{self, ScalerParams, WindowSamples, WindowSpec, N_FEATURES};

/// Monotonic time source in nanoseconds.
pub trait Clock {
    fn now_ns(&self) -> u64;
}

/// A clock that never advances; latencies come out as zero.
pub struct NoClock;

impl Clock for NoClock {
    fn now_ns(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayEvent {
    /// Time just after the window's last sample.
    pub time_ms: f64,
    pub score: f64,
    /// Feature extraction plus scoring time for this window.
    pub latency_ms: f64,
}

/// Sample-by-sample scorer holding only the most recent window.
pub struct StreamingScorer<'a> {
    model: &'a TrainedModel,
    scaler: ScalerParams,
    ws: WindowSamples,
    rate: f64,
    buffer: VecDeque<f64>,
    seen: usize,
}

impl<'a> StreamingScorer<'a> {
    pub fn new(model: &'a TrainedModel, scaler: ScalerParams, spec: &WindowSpec, sample_rate_hz: f64) -> Result<Self> {
        if model.n_features() != N_FEATURES {
            return Err(Error::DimensionMismatch { expected: N_FEATURES, got: model.n_features() });
        }
        let ws = spec.resolve(sample_rate_hz)?;
        Ok(Self { model, scaler, ws, rate: sample_rate_hz, buffer: VecDeque::with_capacity(ws.window), seen: 0 })
    }

    /// Feeds one sample; returns `(time_ms, score)` when a window completes
    /// on a stride boundary.
    pub fn push(&mut self, sample: f64) -> Result<Option<(f64, f64)>> {
        if self.buffer.len() == self.ws.window {
            self.buffer.pop_front();
        }
        self.buffer.push_back(sample);
        self.seen += 1;
        if self.seen < self.ws.window || (self.seen - self.ws.window) % self.ws.stride != 0 {
            return Ok(None);
        }
        let f = windowing::features(self.buffer.make_contiguous())?;
        let z = self.scaler.transform(f.to_array());
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scoring features"));
        }
        Ok(Some((samples_to_ms(self.seen, self.rate), self.model.score_one(&z))))
    }
}

/// Replays a recording as if it arrived live, timing each emission.
pub fn replay_stream(
    emg: &SampledSignal,
    model: &TrainedModel,
    scaler: &ScalerParams,
    spec: &WindowSpec,
    clock: &dyn Clock,
) -> Result<Vec<ReplayEvent>> {
    let mut scorer = StreamingScorer::new(model, *scaler, spec, emg.sample_rate_hz())?;
    let mut out = Vec::new();
    for &x in emg.samples() {
        let t0 = clock.now_ns();
        if let Some((time_ms, score)) = scorer.push(x)? {
            let latency_ms = clock.now_ns().saturating_sub(t0) as f64 / 1e6;
            out.push(ReplayEvent { time_ms, score, latency_ms });
        }
    }
    Ok(out)
}

/// Scores of the same windows computed in one batch: `(time_ms, score)`.
pub fn batch_scores(
    emg: &SampledSignal,
    model: &TrainedModel,
    scaler: &ScalerParams,
    spec: &WindowSpec,
) -> Result<Vec<(f64, f64)>> {
    let rate = emg.sample_rate_hz();
    let windows = match windowing::window_features(emg, spec) {
        Ok(w) => w,
        Err(Error::WindowTooLong { .. }) => Vec::new(),
        Err(e) => return Err(e),
    };
    let x: Vec<f64> = windows.iter().flat_map(|(f, _)| scaler.transform(f.to_array())).collect();
    let scores = model.score_rows(&x, N_FEATURES)?;
    Ok(windows.iter().zip(scores).map(|((_, last), s)| (samples_to_ms(last + 1, rate), s)).collect())
}
