#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gaitphase::synthetic::{write_dataset, SyntheticSpec};

/// Search settings small enough for a quick-grid sweep to finish in
/// seconds on one core.
pub const TINY_SEARCH: &str = "\
[search]
budget = 2
rf_trees = 10..20
rf_max_depth = 2..8
gbm_rounds = 10..30
svm_max_train_rows = 600
knn_k = 1..31

[grid]
stride_ms = 20
";

/// Nine synthetic subjects, 5 and 8 with a near-silent EMG channel.
pub fn small_spec() -> SyntheticSpec {
    SyntheticSpec { subjects: 9, seconds: 10.0, ..SyntheticSpec::default() }
}

pub fn dataset(dir: &Path, spec: &SyntheticSpec) -> PathBuf {
    let root = dir.join("data");
    write_dataset(&root, spec).unwrap();
    root
}

pub fn tiny_config(dir: &Path) -> PathBuf {
    let path = dir.join("tiny.ini");
    std::fs::write(&path, TINY_SEARCH).unwrap();
    path
}

pub fn gaitphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaitphase")).args(args).output().unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Data lines of a CSV written by the reports, comment preamble dropped.
pub fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}
