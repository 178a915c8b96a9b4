//! Gait-like recordings for demos and tests, written in the same text
//! layout the dataset uses.
//!
//! The knee angle follows a cycle whose period drifts a little from stride
//! to stride. Rectus-femoris activity is stronger while the knee extends,
//! and leads that movement by `lead_ms`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use gaitphase_core::dataset::{GaitRecording, SampledSignal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub subjects: u32,
    pub seconds: f64,
    pub sample_rate_hz: f64,
    pub seed: u64,
    /// Subjects whose EMG sensor barely registers anything.
    pub faulty: Vec<u32>,
    pub lead_ms: f64,
    /// Also write abnormal-subject and non-gait files, which ingest must skip.
    pub distractors: bool,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            subjects: 11,
            seconds: 30.0,
            sample_rate_hz: 1000.0,
            seed: 1,
            faulty: vec![5, 8],
            lead_ms: 40.0,
            distractors: true,
        }
    }
}

/// Columns: RF, BF, VM, ST (EMG, mV) and FX (knee flexion, degrees).
fn channels(subject: u32, salt: u64, spec: &SyntheticSpec) -> [Vec<f64>; 5] {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (u64::from(subject) << 20) ^ salt);
    let fs = spec.sample_rate_hz;
    let n = (spec.seconds * fs).round() as usize;
    let base_period = 1.0 + 0.03 * f64::from(subject % 7);

    let mut phase = Vec::with_capacity(n);
    let mut p: f64 = rng.gen_range(0.0..2.0 * PI);
    let mut period = base_period;
    for _ in 0..n {
        phase.push(p);
        let before = p;
        p += 2.0 * PI / (period * fs);
        if (before / (2.0 * PI)).floor() != (p / (2.0 * PI)).floor() {
            period = base_period * (1.0 + 0.04 * rng.sample::<f64, _>(StandardNormal)).clamp(0.85, 1.15);
        }
    }

    let mut gauss = || rng.sample::<f64, _>(StandardNormal);
    let knee: Vec<f64> = phase.iter().map(|&p| 30.0 + 28.0 * p.sin() + 4.0 * (2.0 * p + 0.5).sin() + 0.3 * gauss()).collect();
    let lead = (spec.lead_ms * fs / 1000.0).round() as usize;
    let scale = if spec.faulty.contains(&subject) { 0.0015 } else { 0.02 + 0.008 * f64::from(subject % 4) };
    let rf: Vec<f64> = (0..n)
        .map(|i| {
            let q = phase[(i + lead).min(n - 1)];
            let extending = 28.0 * q.cos() + 8.0 * (2.0 * q + 0.5).cos() < 0.0;
            let env = if extending { 1.0 } else { 0.35 };
            scale * (env * gauss() + 0.1 * gauss())
        })
        .collect();
    let mut noise = || (0..n).map(|_| 0.02 * gauss()).collect::<Vec<f64>>();
    let (bf, vm, st) = (noise(), noise(), noise());
    [rf, bf, vm, st, knee]
}

pub fn recording(subject: u32, spec: &SyntheticSpec) -> GaitRecording {
    let [rf, _, _, _, fx] = channels(subject, 0, spec);
    GaitRecording::new(
        subject,
        SampledSignal::new(rf, spec.sample_rate_hz, "RF").expect("finite samples"),
        SampledSignal::new(fx, spec.sample_rate_hz, "FX").expect("finite samples"),
        true,
    )
    .expect("matching channels")
}

/// Writes a dataset in the layout of the text files:
/// preamble, a header row, then tab-separated samples.
pub fn write_file(path: &Path, subject: u32, exercise: &str, cols: &[Vec<f64>; 5]) -> io::Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "Synthetic lower-limb recording");
    let _ = writeln!(out, "Subject: {subject}");
    let _ = writeln!(out, "Exercise: {exercise}");
    let _ = writeln!(out);
    let _ = writeln!(out, "RF\tBF\tVM\tST\tFX");
    for i in 0..cols[0].len() {
        let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", cols[0][i], cols[1][i], cols[2][i], cols[3][i], cols[4][i]);
    }
    fs::write(path, out)
}

pub fn write_dataset(dir: &Path, spec: &SyntheticSpec) -> io::Result<Vec<PathBuf>> {
    let normal = dir.join("N_TXT");
    fs::create_dir_all(&normal)?;
    let mut written = Vec::new();
    for s in 1..=spec.subjects {
        let path = normal.join(format!("{s}Nmar.txt"));
        write_file(&path, s, "mar", &channels(s, 0, spec))?;
        written.push(path);
        if spec.distractors {
            let path = normal.join(format!("{s}Npie.txt"));
            write_file(&path, s, "pie", &channels(s, 1, spec))?;
            written.push(path);
        }
    }
    if spec.distractors {
        let abnormal = dir.join("A_TXT");
        fs::create_dir_all(&abnormal)?;
        for s in 1..=spec.subjects.min(3) {
            let path = abnormal.join(format!("{s}Amar.txt"));
            write_file(&path, s, "mar", &channels(s, 2, spec))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaitphase_core::dataset::screen_subjects;

    #[test]
    fn faulty_subjects_fail_screening() {
        let spec = SyntheticSpec { subjects: 9, seconds: 4.0, ..Default::default() };
        let recs: Vec<_> = (1..=9).map(|s| recording(s, &spec)).collect();
        let report = screen_subjects(&recs, 0.01);
        assert_eq!(report.excluded_subjects.into_iter().collect::<Vec<_>>(), vec![5, 8]);
    }

    #[test]
    fn deterministic() {
        let spec = SyntheticSpec { seconds: 1.0, ..Default::default() };
        assert_eq!(recording(2, &spec), recording(2, &spec));
        assert_ne!(recording(2, &spec), recording(3, &spec));
    }
}
