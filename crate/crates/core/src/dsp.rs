//! Butterworth filtering (biquad cascades, optionally forward-backward) and
//! max-abs normalization.

use alloc::format;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::dataset::SampledSignal;
use crate::error::{Error, Result};
use crate::math;

/// Band-pass filter settings. `order` is the Butterworth order of each edge
/// (high-pass and low-pass), so the cascade has `2 * order` poles.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BandpassSpec {
    pub low_cut_hz: f64,
    pub high_cut_hz: f64,
    pub order: usize,
    pub zero_phase: bool,
}

impl Default for BandpassSpec {
    fn default() -> Self {
        Self { low_cut_hz: 10.0, high_cut_hz: 300.0, order: 4, zero_phase: true }
    }
}

/// Second-order section, transposed direct form II, `a0` normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }

    /// State that makes a constant unit input produce a constant output.
    fn steady_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let s2 = self.b2 - self.a2 * g;
        let s1 = self.b1 - self.a1 * g + s2;
        [s1, s2]
    }

    #[inline]
    fn step(&self, x: f64, s: &mut [f64; 2]) -> f64 {
        let y = self.b0 * x + s[0];
        s[0] = self.b1 * x - self.a1 * y + s[1];
        s[1] = self.b2 * x - self.a2 * y;
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edge {
    LowPass,
    HighPass,
}

/// A cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct Cascade {
    sections: Vec<Biquad>,
    order: usize,
}

impl Cascade {
    /// Butterworth low-pass of the given order (bilinear transform with
    /// pre-warped cutoff).
    pub fn butterworth_lowpass(cut_hz: f64, order: usize, sample_rate_hz: f64) -> Result<Self> {
        check_cut(cut_hz, sample_rate_hz)?;
        butterworth(Edge::LowPass, cut_hz, order, sample_rate_hz)
    }

    pub fn butterworth_highpass(cut_hz: f64, order: usize, sample_rate_hz: f64) -> Result<Self> {
        check_cut(cut_hz, sample_rate_hz)?;
        butterworth(Edge::HighPass, cut_hz, order, sample_rate_hz)
    }

    /// High-pass at the low edge followed by low-pass at the high edge.
    pub fn butterworth_bandpass(spec: &BandpassSpec, sample_rate_hz: f64) -> Result<Self> {
        check_band(spec, sample_rate_hz)?;
        let mut hp = butterworth(Edge::HighPass, spec.low_cut_hz, spec.order, sample_rate_hz)?;
        let lp = butterworth(Edge::LowPass, spec.high_cut_hz, spec.order, sample_rate_hz)?;
        hp.sections.extend(lp.sections);
        hp.order += lp.order;
        Ok(hp)
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Total filter order (number of poles).
    pub fn order(&self) -> usize {
        self.order
    }

    /// Causal filtering from rest.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for sec in &self.sections {
            let mut s = [0.0; 2];
            for v in y.iter_mut() {
                *v = sec.step(*v, &mut s);
            }
        }
        y
    }

    /// Causal filtering starting from the steady state for a constant input
    /// equal to `x[0]`.
    fn filter_from_steady(&self, x: &mut [f64]) {
        let Some(&first) = x.first() else { return };
        let mut level = first;
        for sec in &self.sections {
            let zi = sec.steady_state();
            let mut s = [zi[0] * level, zi[1] * level];
            for v in x.iter_mut() {
                *v = sec.step(*v, &mut s);
            }
            level *= sec.dc_gain();
        }
    }

    /// Forward-backward (zero-phase) filtering. The signal is extended at each
    /// end by an odd reflection of `3 * order` samples, which is trimmed
    /// afterwards.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = (3 * self.order).min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        let (first, last) = (x[0], x[n - 1]);
        ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * last - x[n - 1 - i]));

        self.filter_from_steady(&mut ext);
        ext.reverse();
        self.filter_from_steady(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }

    /// |H(e^{jω})| of the designed cascade at `freq_hz`.
    pub fn magnitude_at(&self, freq_hz: f64, sample_rate_hz: f64) -> f64 {
        let w = 2.0 * core::f64::consts::PI * freq_hz / sample_rate_hz;
        let (c1, s1) = (libm::cos(w), libm::sin(w));
        let (c2, s2) = (libm::cos(2.0 * w), libm::sin(2.0 * w));
        self.sections.iter().fold(1.0, |acc, b| {
            // e^{-jw} = c1 - j s1
            let num_re = b.b0 + b.b1 * c1 + b.b2 * c2;
            let num_im = -(b.b1 * s1 + b.b2 * s2);
            let den_re = 1.0 + b.a1 * c1 + b.a2 * c2;
            let den_im = -(b.a1 * s1 + b.a2 * s2);
            acc * math::sqrt((num_re * num_re + num_im * num_im) / (den_re * den_re + den_im * den_im))
        })
    }
}

fn check_cut(cut_hz: f64, sample_rate_hz: f64) -> Result<()> {
    let nyquist = sample_rate_hz / 2.0;
    if !(cut_hz > 0.0 && cut_hz < nyquist) {
        return Err(Error::FilterConfig(format!(
            "cutoff {cut_hz} Hz must lie strictly between 0 and Nyquist ({nyquist} Hz)"
        )));
    }
    Ok(())
}

fn check_band(spec: &BandpassSpec, sample_rate_hz: f64) -> Result<()> {
    let nyquist = sample_rate_hz / 2.0;
    if !(spec.low_cut_hz > 0.0 && spec.low_cut_hz < spec.high_cut_hz && spec.high_cut_hz < nyquist) {
        return Err(Error::FilterConfig(format!(
            "band {}–{} Hz must satisfy 0 < low < high < Nyquist ({nyquist} Hz)",
            spec.low_cut_hz, spec.high_cut_hz
        )));
    }
    Ok(())
}

fn butterworth(edge: Edge, cut_hz: f64, order: usize, sample_rate_hz: f64) -> Result<Cascade> {
    if order == 0 || order > 16 {
        return Err(Error::FilterConfig(format!("filter order must be in 1..=16, got {order}")));
    }
    let k = math::tan(core::f64::consts::PI * cut_hz / sample_rate_hz);
    let k2 = k * k;
    let mut sections = Vec::with_capacity(order.div_ceil(2));

    // Conjugate pole pairs of the analog prototype: s^2 + s/Q + 1.
    for i in 0..order / 2 {
        let phi = core::f64::consts::PI * (2 * i + 1) as f64 / (2 * order) as f64;
        let q = 1.0 / (2.0 * math::sin(phi));
        let norm = 1.0 / (1.0 + k / q + k2);
        let a1 = 2.0 * (k2 - 1.0) * norm;
        let a2 = (1.0 - k / q + k2) * norm;
        let sec = match edge {
            Edge::LowPass => Biquad { b0: k2 * norm, b1: 2.0 * k2 * norm, b2: k2 * norm, a1, a2 },
            Edge::HighPass => Biquad { b0: norm, b1: -2.0 * norm, b2: norm, a1, a2 },
        };
        sections.push(sec);
    }
    // Odd orders carry one real pole at s = -1.
    if order % 2 == 1 {
        let a1 = (k - 1.0) / (k + 1.0);
        let sec = match edge {
            Edge::LowPass => {
                let b = k / (1.0 + k);
                Biquad { b0: b, b1: b, b2: 0.0, a1, a2: 0.0 }
            }
            Edge::HighPass => {
                let b = 1.0 / (1.0 + k);
                Biquad { b0: b, b1: -b, b2: 0.0, a1, a2: 0.0 }
            }
        };
        sections.push(sec);
    }
    Ok(Cascade { sections, order })
}

/// Band-pass filters `signal`. With `zero_phase` the cascade runs forward
/// then backward, so no group delay is introduced (and the magnitude
/// response is squared).
pub fn bandpass(signal: &SampledSignal, spec: &BandpassSpec) -> Result<SampledSignal> {
    let cascade = Cascade::butterworth_bandpass(spec, signal.sample_rate_hz())?;
    let out = if spec.zero_phase {
        cascade.filtfilt(signal.samples())
    } else {
        cascade.filter(signal.samples())
    };
    signal.with_samples(out)
}

/// Zero-phase Butterworth low-pass.
pub fn lowpass(signal: &SampledSignal, cut_hz: f64, order: usize) -> Result<SampledSignal> {
    let cascade = Cascade::butterworth_lowpass(cut_hz, order, signal.sample_rate_hz())?;
    signal.with_samples(cascade.filtfilt(signal.samples()))
}

/// Divides by max |sample| so that the output spans at most [-1, 1].
pub fn normalize_maxabs(signal: &SampledSignal) -> Result<SampledSignal> {
    let peak = signal.samples().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::ZeroSignal);
    }
    signal.with_samples(signal.samples().iter().map(|v| v / peak).collect())
}
