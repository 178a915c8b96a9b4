//! Per-subject preparation: filtered EMG and sample-wise phase labels.

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::dataset::{GaitRecording, SampledSignal};
use crate::dsp::{self, BandpassSpec};
use crate::error::Result;
use crate::labeling::{self, ExtremaList, PhaseConvention, PhaseSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PreprocessParams {
    pub bandpass: BandpassSpec,
    /// Knee-angle smoothing before extremum detection.
    pub knee_cut_hz: f64,
    pub knee_order: usize,
    pub min_prominence: f64,
    pub min_separation_ms: f64,
    pub convention: PhaseConvention,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        Self {
            bandpass: BandpassSpec::default(),
            knee_cut_hz: 6.0,
            knee_order: 2,
            min_prominence: 0.3,
            min_separation_ms: 400.0,
            convention: PhaseConvention::default(),
        }
    }
}

/// A subject ready for windowing.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectData {
    pub subject_id: u32,
    /// Band-passed, max-abs normalized EMG.
    pub emg: SampledSignal,
    /// Smoothed, normalized knee angle the labels were read from.
    pub knee: SampledSignal,
    pub extrema: ExtremaList,
    pub phases: PhaseSeries,
}

pub fn prepare_subject(rec: &GaitRecording, p: &PreprocessParams) -> Result<SubjectData> {
    let emg = dsp::normalize_maxabs(&dsp::bandpass(&rec.rf_emg, &p.bandpass)?)?;
    let knee = dsp::normalize_maxabs(&dsp::lowpass(&rec.knee_angle, p.knee_cut_hz, p.knee_order)?)?;
    let extrema = labeling::detect_extrema(&knee, p.min_prominence, p.min_separation_ms)?;
    let phases = labeling::label_phases(&knee, &extrema, p.convention)?;
    Ok(SubjectData { subject_id: rec.subject_id, emg, knee, extrema, phases })
}
