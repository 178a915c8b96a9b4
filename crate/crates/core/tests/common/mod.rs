#![allow(dead_code)]

use std::f64::consts::PI;

use gaitphase_core::dataset::{GaitRecording, SampledSignal};
use gaitphase_core::preprocess::{prepare_subject, PreprocessParams, SubjectData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const FS: f64 = 1000.0;

/// Walking-like recording: sinusoidal knee angle and noise EMG whose
/// envelope rises 40 ms before the knee starts extending.
pub fn recording(subject: u32, seconds: f64, seed: u64) -> GaitRecording {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ u64::from(subject) << 32);
    let n = (seconds * FS) as usize;
    let period = 1.0 + 0.04 * f64::from(subject % 5);
    let phase0: f64 = rng.gen_range(0.0..2.0 * PI);
    let w = 2.0 * PI / period;
    let knee: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / FS;
            35.0 + 30.0 * (w * t + phase0).sin() + 0.3 * rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    let emg: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / FS + 0.04;
            let extending = (w * t + phase0).cos() < 0.0;
            let amp = if extending { 0.08 } else { 0.03 };
            amp * rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    GaitRecording::new(
        subject,
        SampledSignal::new(emg, FS, "RF").unwrap(),
        SampledSignal::new(knee, FS, "FX").unwrap(),
        true,
    )
    .unwrap()
}

pub fn subjects(ids: &[u32], seconds: f64, seed: u64) -> Vec<SubjectData> {
    ids.iter()
        .map(|&id| prepare_subject(&recording(id, seconds, seed), &PreprocessParams::default()).unwrap())
        .collect()
}

/// Counts positive/negative pairs directly.
pub fn brute_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] != 0 {
                continue;
            }
            den += 1.0;
            if si > sj {
                num += 1.0;
            } else if si == sj {
                num += 0.5;
            }
        }
    }
    num / den
}
