//! Typed recordings and subject screening.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// Default p95(|EMG|) threshold below which a subject's channel is treated
/// as not recording.
pub const DEFAULT_P95_THRESHOLD: f64 = 0.01;

/// A uniformly sampled real-valued channel.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SampledSignal {
    samples: Vec<f64>,
    sample_rate_hz: f64,
    channel_name: String,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64, channel_name: impl Into<String>) -> Result<Self> {
        let channel_name = channel_name.into();
        if samples.is_empty() {
            return Err(Error::InvalidSignal(format!("channel {channel_name} has no samples")));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "channel {channel_name}: sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "channel {channel_name}: non-finite sample at index {i}"
            )));
        }
        Ok(Self { samples, sample_rate_hz, channel_name })
    }

    /// Same rate and name, new samples (validated).
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, self.sample_rate_hz, self.channel_name.clone())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn channel_name(&self) -> &str {
        &self.channel_name
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.sample_rate_hz / 2.0
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// One subject's paired rectus-femoris EMG and knee-angle channels.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GaitRecording {
    pub subject_id: u32,
    pub rf_emg: SampledSignal,
    pub knee_angle: SampledSignal,
    pub healthy: bool,
}

impl GaitRecording {
    /// Both channels must share rate and length.
    pub fn new(subject_id: u32, rf_emg: SampledSignal, knee_angle: SampledSignal, healthy: bool) -> Result<Self> {
        if rf_emg.sample_rate_hz() != knee_angle.sample_rate_hz() {
            return Err(Error::InvalidSignal(format!(
                "subject {subject_id}: EMG at {} Hz but knee angle at {} Hz",
                rf_emg.sample_rate_hz(),
                knee_angle.sample_rate_hz()
            )));
        }
        if rf_emg.len() != knee_angle.len() {
            return Err(Error::InvalidSignal(format!(
                "subject {subject_id}: EMG has {} samples but knee angle has {}",
                rf_emg.len(),
                knee_angle.len()
            )));
        }
        Ok(Self { subject_id, rf_emg, knee_angle, healthy })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.rf_emg.sample_rate_hz()
    }

    pub fn len(&self) -> usize {
        self.rf_emg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rf_emg.is_empty()
    }
}

/// q-quantile with linear interpolation between order statistics
/// (position `(n - 1) * q` in the sorted values).
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("quantile of an empty sequence"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("quantile level {q} outside [0, 1]")));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("quantile input"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, q))
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = math::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SubjectQuantiles {
    pub subject_id: u32,
    pub p50: f64,
    pub p90: f64,
    pub p95: f64,
}

/// Per-subject |EMG| quantiles and the resulting exclusions.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ScreeningReport {
    pub p95_threshold: f64,
    /// Sorted by subject id.
    pub quantiles: Vec<SubjectQuantiles>,
    pub excluded_subjects: BTreeSet<u32>,
    pub exclusion_reasons: BTreeMap<u32, String>,
}

impl ScreeningReport {
    pub fn is_excluded(&self, subject_id: u32) -> bool {
        self.excluded_subjects.contains(&subject_id)
    }

    pub fn retained_subjects(&self) -> Vec<u32> {
        self.quantiles
            .iter()
            .map(|q| q.subject_id)
            .filter(|id| !self.excluded_subjects.contains(id))
            .collect()
    }
}

/// Computes p50/p90/p95 of |raw EMG| per subject and excludes every subject
/// whose p95 falls below `p95_threshold`.
pub fn screen_subjects(recordings: &[GaitRecording], p95_threshold: f64) -> ScreeningReport {
    let mut quantiles: Vec<SubjectQuantiles> = recordings
        .iter()
        .map(|rec| {
            let mut abs: Vec<f64> = rec.rf_emg.samples().iter().map(|v| v.abs()).collect();
            abs.sort_unstable_by(f64::total_cmp);
            SubjectQuantiles {
                subject_id: rec.subject_id,
                p50: quantile_sorted(&abs, 0.50),
                p90: quantile_sorted(&abs, 0.90),
                p95: quantile_sorted(&abs, 0.95),
            }
        })
        .collect();
    quantiles.sort_by_key(|q| q.subject_id);

    let mut excluded_subjects = BTreeSet::new();
    let mut exclusion_reasons = BTreeMap::new();
    for q in &quantiles {
        if q.p95 < p95_threshold {
            excluded_subjects.insert(q.subject_id);
            exclusion_reasons.insert(
                q.subject_id,
                format!("p95(|EMG|) = {:.4} below threshold {}", q.p95, p95_threshold),
            );
        }
    }
    ScreeningReport { p95_threshold, quantiles, excluded_subjects, exclusion_reasons }
}

/// Recordings that survived screening, in ascending subject order.
pub fn retained<'a>(recordings: &'a [GaitRecording], report: &ScreeningReport) -> Vec<&'a GaitRecording> {
    let mut kept: Vec<&GaitRecording> = recordings
        .iter()
        .filter(|r| !report.is_excluded(r.subject_id))
        .collect();
    kept.sort_by_key(|r| r.subject_id);
    kept
}

/// Rejects duplicate subject ids.
pub fn check_unique_subjects(recordings: &[GaitRecording]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for r in recordings {
        if !seen.insert(r.subject_id) {
            return Err(Error::InvalidArgument(format!("duplicate subject id {}", r.subject_id)));
        }
    }
    Ok(())
}

impl core::fmt::Display for SubjectQuantiles {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{:>3}  {:.4}  {:.4}  {:.4}", self.subject_id, self.p50, self.p90, self.p95)
    }
}

impl ScreeningReport {
    /// Plain-text rendering of the quantile table (rows = levels, columns = subjects).
    pub fn table(&self) -> String {
        let mut out = String::from("Subject");
        for q in &self.quantiles {
            out.push_str(&format!(" {:>7}", q.subject_id));
        }
        out.push('\n');
        for (name, get) in [
            ("50", (|q: &SubjectQuantiles| q.p50) as fn(&SubjectQuantiles) -> f64),
            ("90", |q| q.p90),
            ("95", |q| q.p95),
        ] {
            out.push_str(&format!("{name:<7}"));
            for q in &self.quantiles {
                out.push_str(&format!(" {:>7.4}", get(q)));
            }
            out.push('\n');
        }
        if self.excluded_subjects.is_empty() {
            out.push_str("excluded: none\n");
        } else {
            let ids: Vec<String> = self.excluded_subjects.iter().map(|s| s.to_string()).collect();
            out.push_str(&format!("excluded: {}\n", ids.join(", ")));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(id: u32, emg: Vec<f64>) -> GaitRecording {
        let n = emg.len();
        GaitRecording::new(
            id,
            SampledSignal::new(emg, 1000.0, "RF").unwrap(),
            SampledSignal::new(vec![0.0; n], 1000.0, "FX").unwrap(),
            true,
        )
        .unwrap()
    }

    #[test]
    fn quantile_median_of_odd_list() {
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.5).unwrap(), 3.0);
    }

    #[test]
    fn quantile_interpolates() {
        assert!((quantile(&[0.0, 10.0], 0.95).unwrap() - 9.5).abs() < 1e-12);
        assert_eq!(quantile(&[10.0, 0.0], 0.0).unwrap(), 0.0);
        assert_eq!(quantile(&[10.0, 0.0], 1.0).unwrap(), 10.0);
    }

    #[test]
    fn quantile_errors() {
        assert!(matches!(quantile(&[], 0.5), Err(Error::Empty(_))));
        assert!(quantile(&[1.0], 1.5).is_err());
        assert!(quantile(&[f64::NAN], 0.5).is_err());
    }

    #[test]
    fn signal_rejects_non_finite_and_empty() {
        assert!(SampledSignal::new(vec![], 1000.0, "x").is_err());
        assert!(SampledSignal::new(vec![1.0, f64::INFINITY], 1000.0, "x").is_err());
        assert!(SampledSignal::new(vec![1.0], 0.0, "x").is_err());
    }

    #[test]
    fn recording_requires_matching_channels() {
        let a = SampledSignal::new(vec![0.0; 10], 1000.0, "RF").unwrap();
        let b = SampledSignal::new(vec![0.0; 9], 1000.0, "FX").unwrap();
        assert!(GaitRecording::new(1, a.clone(), b, true).is_err());
        let c = SampledSignal::new(vec![0.0; 10], 500.0, "FX").unwrap();
        assert!(GaitRecording::new(1, a, c, true).is_err());
    }

    #[test]
    fn zero_channel_is_excluded() {
        let report = screen_subjects(&[rec(3, vec![0.0; 100])], DEFAULT_P95_THRESHOLD);
        assert_eq!(report.quantiles[0].p95, 0.0);
        assert!(report.is_excluded(3));
        assert!(report.exclusion_reasons.contains_key(&3));
    }

    #[test]
    fn zero_threshold_excludes_nothing() {
        let report = screen_subjects(&[rec(1, vec![0.0; 10]), rec(2, vec![1.0; 10])], 0.0);
        assert!(report.excluded_subjects.is_empty());
    }

    #[test]
    fn screening_uses_absolute_values() {
        let emg: Vec<f64> = (0..101).map(|i| -(i as f64) / 100.0).collect();
        let report = screen_subjects(&[rec(1, emg)], 0.01);
        let q = report.quantiles[0];
        assert!((q.p50 - 0.5).abs() < 1e-12);
        assert!((q.p90 - 0.9).abs() < 1e-12);
        assert!((q.p95 - 0.95).abs() < 1e-12);
        assert!(report.table().contains("excluded: none"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        assert!(check_unique_subjects(&[rec(1, vec![1.0]), rec(1, vec![1.0])]).is_err());
        assert!(check_unique_subjects(&[rec(1, vec![1.0]), rec(2, vec![1.0])]).is_ok());
    }
}
