//! Reader for the per-subject text files of the lower-limb EMG dataset.
//!
//! File names look like `3Nmar.txt`: subject number, `N` (normal) or `A`
//! (abnormal) and the exercise tag (`mar` is gait). Each file has free-form
//! preamble lines followed by a header row naming the channels and one row
//! of samples per line.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gaitphase_core::dataset::{GaitRecording, SampledSignal};
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

/// Abnormal subjects get this offset so their ids never collide with
/// healthy ones.
pub const ABNORMAL_ID_OFFSET: u32 = 100;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("dataset directory {0} does not exist")]
    MissingDirectory(PathBuf),
    #[error("no subject files found under {0}")]
    NoSubjectFiles(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: no header row naming columns {emg:?} and {knee:?}")]
    MissingColumn { path: PathBuf, emg: String, knee: String },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("subject {id} appears in both {first} and {second}")]
    DuplicateSubject { id: u32, first: PathBuf, second: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delimiter {
    Whitespace,
    Tab,
    Comma,
    Semicolon,
}

impl Delimiter {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "whitespace" | "ws" => Some(Self::Whitespace),
            "tab" | "\\t" => Some(Self::Tab),
            "comma" | "," => Some(Self::Comma),
            "semicolon" | ";" => Some(Self::Semicolon),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Whitespace => "whitespace",
            Self::Tab => "tab",
            Self::Comma => "comma",
            Self::Semicolon => "semicolon",
        }
    }

    fn split<'a>(self, line: &'a str) -> Vec<&'a str> {
        match self {
            Self::Whitespace => line.split_whitespace().collect(),
            Self::Tab => line.split('\t').map(str::trim).collect(),
            Self::Comma => line.split(',').map(str::trim).collect(),
            Self::Semicolon => line.split(';').map(str::trim).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub emg_column: String,
    pub knee_column: String,
    pub sample_rate_hz: f64,
    /// Exercise tag taken from file names; `mar` is walking.
    pub exercise: String,
    pub include_abnormal: bool,
    pub delimiter: Delimiter,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            emg_column: "RF".into(),
            knee_column: "FX".into(),
            sample_rate_hz: 1000.0,
            exercise: "mar".into(),
            include_abnormal: false,
            delimiter: Delimiter::Whitespace,
        }
    }
}

/// Parsed parts of a subject file name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileTag {
    pub subject: u32,
    pub healthy: bool,
    pub exercise: String,
}

pub fn parse_file_name(name: &str) -> Option<FileTag> {
    let stem = name.strip_suffix(".txt").or_else(|| name.strip_suffix(".TXT"))?;
    let digits = stem.chars().take_while(char::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let subject = stem[..digits].parse().ok()?;
    let mut rest = stem[digits..].chars();
    let healthy = match rest.next()?.to_ascii_uppercase() {
        'N' => true,
        'A' => false,
        _ => return None,
    };
    let exercise: String = rest.collect::<String>().to_ascii_lowercase();
    if exercise.is_empty() {
        return None;
    }
    Some(FileTag { subject, healthy, exercise })
}

/// Every matching subject file under `root` (recursively), sorted by
/// subject id.
pub fn ingest_dataset(root: &Path, cfg: &IngestConfig) -> Result<Vec<GaitRecording>, IngestError> {
    if !root.is_dir() {
        return Err(IngestError::MissingDirectory(root.to_path_buf()));
    }
    let mut found: BTreeMap<u32, (PathBuf, FileTag)> = BTreeMap::new();
    let exercise = cfg.exercise.to_ascii_lowercase();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| IngestError::Io {
            path: e.path().map_or_else(|| root.to_path_buf(), Path::to_path_buf),
            source: e.into(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let Some(tag) = entry.file_name().to_str().and_then(parse_file_name) else { continue };
        if tag.exercise != exercise || (!tag.healthy && !cfg.include_abnormal) {
            continue;
        }
        let id = if tag.healthy { tag.subject } else { tag.subject + ABNORMAL_ID_OFFSET };
        let path = entry.path().to_path_buf();
        if let Some((first, _)) = found.get(&id) {
            return Err(IngestError::DuplicateSubject { id, first: first.clone(), second: path });
        }
        found.insert(id, (path, tag));
    }
    if found.is_empty() {
        return Err(IngestError::NoSubjectFiles(root.to_path_buf()));
    }
    found.into_iter().map(|(id, (path, tag))| read_subject_file(&path, id, tag.healthy, cfg)).collect()
}

pub fn read_subject_file(path: &Path, subject_id: u32, healthy: bool, cfg: &IngestConfig) -> Result<GaitRecording, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.into(), source })?;
    let mut lines = text.lines().enumerate();
    let (emg_col, knee_col, width) = loop {
        let Some((_, line)) = lines.next() else {
            return Err(IngestError::MissingColumn {
                path: path.into(),
                emg: cfg.emg_column.clone(),
                knee: cfg.knee_column.clone(),
            });
        };
        let cols = cfg.delimiter.split(line);
        let find = |name: &str| cols.iter().position(|c| c.eq_ignore_ascii_case(name));
        if let (Some(e), Some(k)) = (find(&cfg.emg_column), find(&cfg.knee_column)) {
            break (e, k, cols.len());
        }
    };

    let mut emg = Vec::new();
    let mut knee = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols = cfg.delimiter.split(line);
        let parse_err = |message: String| IngestError::Parse { path: path.into(), line: lineno, message };
        if cols.len() < width {
            return Err(parse_err(format!("expected {width} columns, found {}", cols.len())));
        }
        let value = |c: usize, name: &str| -> Result<f64, IngestError> {
            let v: f64 = cols[c].parse().map_err(|_| parse_err(format!("cannot parse {name} value {:?}", cols[c])))?;
            if !v.is_finite() {
                return Err(parse_err(format!("non-finite {name} value {:?}", cols[c])));
            }
            Ok(v)
        };
        emg.push(value(emg_col, &cfg.emg_column)?);
        knee.push(value(knee_col, &cfg.knee_column)?);
    }
    let invalid = |e: gaitphase_core::Error| IngestError::Invalid { path: path.into(), message: e.to_string() };
    let rf = SampledSignal::new(emg, cfg.sample_rate_hz, cfg.emg_column.clone()).map_err(invalid)?;
    let fx = SampledSignal::new(knee, cfg.sample_rate_hz, cfg.knee_column.clone()).map_err(invalid)?;
    GaitRecording::new(subject_id, rf, fx, healthy).map_err(invalid)
}
