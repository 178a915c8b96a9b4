//! Moving windows, delay-shifted labels and the four time-domain features.

use alloc::format;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::dataset::SampledSignal;
use crate::error::{Error, Result};
use crate::labeling::PhaseSeries;
use crate::math;
use crate::units::{ms_to_samples, samples_to_ms};

pub const N_FEATURES: usize = 4;
pub const FEATURE_NAMES: [&str; N_FEATURES] = ["zc", "mav", "sigma", "mad"];

/// Floor applied to fitted standard deviations.
pub const SCALER_STD_FLOOR: f64 = 1e-8;

pub const DEFAULT_STRIDE_MS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct WindowSpec {
    pub window_ms: f64,
    pub delay_ms: f64,
    pub stride_ms: f64,
}

/// A [`WindowSpec`] converted to sample counts at one rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSamples {
    pub window: usize,
    pub delay: usize,
    pub stride: usize,
}

impl WindowSpec {
    pub fn new(window_ms: f64, delay_ms: f64, stride_ms: f64) -> Self {
        Self { window_ms, delay_ms, stride_ms }
    }

    pub fn resolve(&self, sample_rate_hz: f64) -> Result<WindowSamples> {
        if !(self.window_ms.is_finite() && self.delay_ms.is_finite() && self.stride_ms.is_finite()) {
            return Err(Error::InvalidWindow(format!("{self:?} has non-finite fields")));
        }
        if self.delay_ms < 0.0 {
            return Err(Error::InvalidWindow(format!("negative delay {} ms", self.delay_ms)));
        }
        let window = ms_to_samples(self.window_ms, sample_rate_hz);
        let stride = ms_to_samples(self.stride_ms, sample_rate_hz);
        if window < 2 {
            return Err(Error::WindowTooShort(window));
        }
        if stride < 1 {
            return Err(Error::InvalidWindow(format!("stride {} ms is under one sample", self.stride_ms)));
        }
        Ok(WindowSamples { window, delay: ms_to_samples(self.delay_ms, sample_rate_hz), stride })
    }
}

/// Zero crossings, mean absolute value, population standard deviation and
/// mean absolute deviation of one window.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FeatureVector {
    /// Half the summed sign jumps; a touch of zero counts one half.
    pub zc: f64,
    pub mav: f64,
    pub sigma: f64,
    pub mad: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; N_FEATURES] {
        [self.zc, self.mav, self.sigma, self.mad]
    }

    pub fn from_array(a: [f64; N_FEATURES]) -> Self {
        Self { zc: a[0], mav: a[1], sigma: a[2], mad: a[3] }
    }
}

#[inline]
fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Evaluates the four features exactly as defined; `sgn(0) = 0`, no
/// dead-band on zero crossings, σ with denominator n.
pub fn features(window: &[f64]) -> Result<FeatureVector> {
    let n = window.len();
    if n < 2 {
        return Err(Error::WindowTooShort(n));
    }
    if window.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("feature window"));
    }
    let nf = n as f64;
    let zc = 0.5 * window.windows(2).map(|w| (sgn(w[0]) - sgn(w[1])).abs()).sum::<f64>();
    let mav = window.iter().map(|v| v.abs()).sum::<f64>() / nf;
    let mean = window.iter().sum::<f64>() / nf;
    let (sq, abs_dev) = window.iter().fold((0.0, 0.0), |(sq, ad), &v| {
        let d = v - mean;
        (sq + d * d, ad + d.abs())
    });
    Ok(FeatureVector { zc, mav, sigma: math::sqrt(sq / nf), mad: abs_dev / nf })
}

/// Features of every full window (starting at sample 0, `stride` apart),
/// paired with the index of the window's last sample. No labels involved.
pub fn window_features(emg: &SampledSignal, spec: &WindowSpec) -> Result<Vec<(FeatureVector, usize)>> {
    let ws = spec.resolve(emg.sample_rate_hz())?;
    let x = emg.samples();
    if ws.window > x.len() {
        return Err(Error::WindowTooLong { window: ws.window, len: x.len() });
    }
    (0..=x.len() - ws.window)
        .step_by(ws.stride)
        .map(|start| {
            let end = start + ws.window;
            Ok((features(&x[start..end])?, end - 1))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FeatureRow {
    pub features: FeatureVector,
    pub label: u8,
    pub subject: u32,
    /// Time of the window's right edge.
    pub end_ms: f64,
}

/// Rows of features sharing one [`WindowSpec`]. After [`apply_scaler`] the
/// feature slots hold standardized values and `scaled` is set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FeatureMatrix {
    pub spec: WindowSpec,
    pub rows: Vec<FeatureRow>,
    pub scaled: bool,
}

impl FeatureMatrix {
    pub fn empty(spec: WindowSpec) -> Self {
        Self { spec, rows: Vec::new(), scaled: false }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// Row-major feature values.
    pub fn flat_features(&self) -> Vec<f64> {
        self.rows.iter().flat_map(|r| r.features.to_array()).collect()
    }

    /// Stacks matrices that share a window spec and scaling state.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a FeatureMatrix>) -> Result<FeatureMatrix> {
        let mut iter = parts.into_iter();
        let Some(first) = iter.next() else {
            return Err(Error::Empty("no feature matrices to concatenate"));
        };
        let mut out = first.clone();
        for m in iter {
            if m.spec != out.spec || m.scaled != out.scaled {
                return Err(Error::InvalidArgument("feature matrices disagree on window spec or scaling".into()));
            }
            out.rows.extend_from_slice(&m.rows);
        }
        Ok(out)
    }
}

/// Windows the EMG of one subject and attaches the phase label found
/// `delay` samples after each window's last sample. Windows whose shifted
/// label falls past the end are dropped.
pub fn segment(emg: &SampledSignal, phases: &PhaseSeries, spec: &WindowSpec, subject: u32) -> Result<FeatureMatrix> {
    if phases.len() != emg.len() {
        return Err(Error::InvalidArgument(format!(
            "EMG has {} samples but phase series has {}",
            emg.len(),
            phases.len()
        )));
    }
    let ws = spec.resolve(emg.sample_rate_hz())?;
    let rate = emg.sample_rate_hz();
    let rows = window_features(emg, spec)?
        .into_iter()
        .filter_map(|(features, last)| {
            phases.labels.get(last + ws.delay).map(|&label| FeatureRow {
                features,
                label,
                subject,
                end_ms: samples_to_ms(last + 1, rate),
            })
        })
        .collect();
    Ok(FeatureMatrix { spec: *spec, rows, scaled: false })
}

/// Closed-form row count of [`segment`].
pub fn expected_rows(len: usize, ws: WindowSamples) -> usize {
    if ws.window + ws.delay > len {
        return 0;
    }
    (len - ws.window - ws.delay) / ws.stride + 1
}

/// Per-feature mean and (floored) population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ScalerParams {
    pub mean: [f64; N_FEATURES],
    pub std: [f64; N_FEATURES],
}

impl ScalerParams {
    pub fn identity() -> Self {
        Self { mean: [0.0; N_FEATURES], std: [1.0; N_FEATURES] }
    }

    #[inline]
    pub fn transform(&self, x: [f64; N_FEATURES]) -> [f64; N_FEATURES] {
        core::array::from_fn(|j| (x[j] - self.mean[j]) / self.std[j])
    }

    #[inline]
    pub fn inverse(&self, z: [f64; N_FEATURES]) -> [f64; N_FEATURES] {
        core::array::from_fn(|j| z[j] * self.std[j] + self.mean[j])
    }
}

/// Fits a standard scaler on the given (training) rows.
pub fn fit_scaler(train: &FeatureMatrix) -> Result<ScalerParams> {
    if train.is_empty() {
        return Err(Error::Empty("cannot fit scaler on an empty matrix"));
    }
    let n = train.len() as f64;
    let mut mean = [0.0; N_FEATURES];
    for r in &train.rows {
        for (m, v) in mean.iter_mut().zip(r.features.to_array()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; N_FEATURES];
    for r in &train.rows {
        for (j, v) in r.features.to_array().into_iter().enumerate() {
            let d = v - mean[j];
            var[j] += d * d;
        }
    }
    let std = var.map(|s| math::sqrt(s / n).max(SCALER_STD_FLOOR));
    Ok(ScalerParams { mean, std })
}

/// `(x - mean) / std` on every row; labels, subjects and times untouched.
pub fn apply_scaler(m: &FeatureMatrix, p: &ScalerParams) -> FeatureMatrix {
    FeatureMatrix {
        spec: m.spec,
        rows: m
            .rows
            .iter()
            .map(|r| FeatureRow { features: FeatureVector::from_array(p.transform(r.features.to_array())), ..*r })
            .collect(),
        scaled: true,
    }
}

/// Undoes [`apply_scaler`].
pub fn invert_scaler(m: &FeatureMatrix, p: &ScalerParams) -> FeatureMatrix {
    FeatureMatrix {
        spec: m.spec,
        rows: m
            .rows
            .iter()
            .map(|r| FeatureRow { features: FeatureVector::from_array(p.inverse(r.features.to_array())), ..*r })
            .collect(),
        scaled: false,
    }
}
