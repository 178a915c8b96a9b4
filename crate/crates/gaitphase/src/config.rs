//! Run configuration: an INI file with one section per pipeline stage.
//!
//! ```ini
//! [dataset]
//! path = /data/lower-limb-emg
//! emg_column = RF
//!
//! [grid]
//! windows_ms = 50:400:25
//! delays_ms = 0,10,20
//!
//! [search]
//! models = svm,knn
//! svm_c = 0.1..100
//! ```
//!
//! Every key has a default, so an empty file is a valid configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gaitphase_core::classifiers::search::{IntRange, LogRange, SvmKernelChoice};
use gaitphase_core::classifiers::ModelKind;
use gaitphase_core::dataset::DEFAULT_P95_THRESHOLD;
use gaitphase_core::evaluation::{EvalConfig, Protocol, SweepGrid};
use gaitphase_core::labeling::PhaseConvention;
use gaitphase_core::preprocess::PreprocessParams;
use ini::Ini;

use crate::ingest::{Delimiter, IngestConfig};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("unknown config key [{section}] {key}")]
    UnknownKey { section: String, key: String },
    #[error("[{section}] {key} = {value:?}: {message}")]
    BadValue { section: String, key: String, value: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub ingest: IngestConfig,
    pub p95_threshold: f64,
    pub preprocess: PreprocessParams,
    pub grid: SweepGrid,
    pub models: Vec<ModelKind>,
    pub eval: EvalConfig,
    /// Median replay latency above this is reported as a warning.
    pub latency_budget_ms: f64,
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            ingest: IngestConfig::default(),
            p95_threshold: DEFAULT_P95_THRESHOLD,
            preprocess: PreprocessParams::default(),
            grid: SweepGrid::full(),
            models: ModelKind::ALL.to_vec(),
            eval: EvalConfig { seed: 1, ..EvalConfig::default() },
            latency_budget_ms: 10.0,
            out_dir: PathBuf::from("gaitphase-out"),
            jobs: 0,
        }
    }
}

/// Parses `a`, `a,b,c`, `lo:hi:step` or a comma list mixing them.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let fields: Vec<&str> = part.split(':').map(str::trim).collect();
        match fields.as_slice() {
            [v] => out.push(num(v)?),
            [a, b, step] => {
                let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                if !(step > 0.0) || b < a {
                    return Err(format!("bad range {part:?}"));
                }
                let n = ((b - a) / step + 1e-9).floor() as usize;
                out.extend((0..=n).map(|i| a + step * i as f64));
            }
            _ => return Err(format!("cannot parse {part:?}")),
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

/// Parses `WINDOWS x DELAYS`, e.g. `300x40` or `275,300x0:40:10`.
pub fn parse_grid(s: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let (w, d) = s.split_once(['x', 'X']).ok_or_else(|| format!("grid {s:?} is not WINDOWSxDELAYS"))?;
    Ok((parse_list(w)?, parse_list(d)?))
}

pub fn parse_models(s: &str) -> Result<Vec<ModelKind>, String> {
    let mut models = Vec::new();
    for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        if name.eq_ignore_ascii_case("all") {
            return Ok(ModelKind::ALL.to_vec());
        }
        let kind = ModelKind::from_name(name).ok_or_else(|| format!("unknown model {name:?}"))?;
        if !models.contains(&kind) {
            models.push(kind);
        }
    }
    if models.is_empty() {
        return Err("no models given".into());
    }
    models.sort();
    Ok(models)
}

fn num(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if !v.is_finite() {
        return Err(format!("{s:?} is not finite"));
    }
    Ok(v)
}

fn uint(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("{s:?} is not a non-negative integer"))
}

fn boolean(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("{s:?} is not a boolean")),
    }
}

fn optional<T>(s: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, String> {
    if s.eq_ignore_ascii_case("none") || s.is_empty() {
        Ok(None)
    } else {
        f(s).map(Some)
    }
}

fn split_range(s: &str) -> Result<(&str, &str), String> {
    s.split_once("..").map(|(a, b)| (a.trim(), b.trim())).ok_or_else(|| format!("{s:?} is not LO..HI"))
}

fn int_range(s: &str) -> Result<IntRange, String> {
    let (a, b) = split_range(s)?;
    Ok(IntRange::new(uint(a)?, uint(b)?))
}

fn log_range(s: &str) -> Result<LogRange, String> {
    let (a, b) = split_range(s)?;
    Ok(LogRange::new(num(a)?, num(b)?))
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn show_opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "none".into(), |x| x.to_string())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_ini_str(&text)
    }

    pub fn from_ini_str(text: &str) -> Result<Self, ConfigError> {
        let ini = Ini::load_from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let mut cfg = Self::default();
        for (section, props) in ini.iter() {
            let section = section.unwrap_or("");
            for (key, value) in props.iter() {
                cfg.set(section, key, value)?;
            }
        }
        Ok(cfg)
    }

    /// Sets one `[section] key = value` entry.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        let bad = |message: String| ConfigError::BadValue {
            section: section.into(),
            key: key.into(),
            value: v.into(),
            message,
        };
        let known: Result<bool, String> = (|| {
            match (section, key) {
                ("dataset", "path") => self.dataset = optional(v, |s| Ok(PathBuf::from(s)))?,
                ("dataset", "emg_column") => self.ingest.emg_column = v.into(),
                ("dataset", "knee_column") => self.ingest.knee_column = v.into(),
                ("dataset", "sample_rate_hz") => self.ingest.sample_rate_hz = num(v)?,
                ("dataset", "exercise") => self.ingest.exercise = v.into(),
                ("dataset", "include_abnormal") => self.ingest.include_abnormal = boolean(v)?,
                ("dataset", "delimiter") => {
                    self.ingest.delimiter = Delimiter::parse(v).ok_or("expected whitespace, tab, comma or semicolon")?
                }
                ("screening", "p95_threshold") => self.p95_threshold = num(v)?,
                ("filter", "low_cut_hz") => self.preprocess.bandpass.low_cut_hz = num(v)?,
                ("filter", "high_cut_hz") => self.preprocess.bandpass.high_cut_hz = num(v)?,
                ("filter", "order") => self.preprocess.bandpass.order = uint(v)?,
                ("filter", "zero_phase") => self.preprocess.bandpass.zero_phase = boolean(v)?,
                ("labeling", "knee_cut_hz") => self.preprocess.knee_cut_hz = num(v)?,
                ("labeling", "knee_order") => self.preprocess.knee_order = uint(v)?,
                ("labeling", "min_prominence") => self.preprocess.min_prominence = num(v)?,
                ("labeling", "min_separation_ms") => self.preprocess.min_separation_ms = num(v)?,
                ("labeling", "convention") => {
                    self.preprocess.convention =
                        PhaseConvention::from_tag(v).ok_or("expected max_starts_stance or min_starts_stance")?
                }
                ("grid", "windows_ms") => self.grid.windows_ms = parse_list(v)?,
                ("grid", "delays_ms") => self.grid.delays_ms = parse_list(v)?,
                ("grid", "stride_ms") => self.grid.stride_ms = num(v)?,
                ("search", "models") => self.models = parse_models(v)?,
                ("search", "budget") => self.eval.budget = uint(v)?,
                ("search", "seed") => self.eval.seed = v.parse().map_err(|_| format!("{v:?} is not a u64"))?,
                ("search", "protocol") => {
                    self.eval.protocol = match v {
                        "flat" => Protocol::Flat,
                        "nested" => Protocol::Nested,
                        _ => return Err("expected flat or nested".into()),
                    }
                }
                ("search", "svm_max_train_rows") => self.eval.train.svm_max_train_rows = optional(v, uint)?,
                ("search", "permute_labels") => {
                    self.eval.permute_labels = optional(v, |s| s.parse().map_err(|_| format!("{s:?} is not a u64")))?
                }
                ("search", "nb_var_smoothing") => self.eval.space.nb_var_smoothing = log_range(v)?,
                ("search", "dt_max_depth") => self.eval.space.dt_max_depth = int_range(v)?,
                ("search", "dt_min_samples_leaf") => self.eval.space.dt_min_samples_leaf = int_range(v)?,
                ("search", "rf_trees") => self.eval.space.rf_trees = int_range(v)?,
                ("search", "rf_max_depth") => self.eval.space.rf_max_depth = int_range(v)?,
                ("search", "rf_min_samples_leaf") => self.eval.space.rf_min_samples_leaf = int_range(v)?,
                ("search", "gbm_rounds") => self.eval.space.gbm_rounds = int_range(v)?,
                ("search", "gbm_learning_rate") => self.eval.space.gbm_learning_rate = log_range(v)?,
                ("search", "gbm_max_depth") => self.eval.space.gbm_max_depth = uint(v)?,
                ("search", "svm_c") => self.eval.space.svm_c = log_range(v)?,
                ("search", "svm_gamma") => self.eval.space.svm_gamma = log_range(v)?,
                ("search", "svm_kernel") => {
                    self.eval.space.svm_kernel = match v {
                        "rbf" => SvmKernelChoice::Rbf,
                        "linear" => SvmKernelChoice::Linear,
                        _ => return Err("expected rbf or linear".into()),
                    }
                }
                ("search", "knn_k") => self.eval.space.knn_k = int_range(v)?,
                ("replay", "latency_budget_ms") => self.latency_budget_ms = num(v)?,
                ("output", "dir") => self.out_dir = PathBuf::from(v),
                ("output", "jobs") => self.jobs = uint(v)?,
                _ => return Ok(false),
            }
            Ok(true)
        })();
        match known {
            Ok(true) => Ok(()),
            Ok(false) => Err(ConfigError::UnknownKey { section: section.into(), key: key.into() }),
            Err(m) => Err(bad(m)),
        }
    }

    /// Every setting as `(section, key, value)`, in file order.
    pub fn entries(&self) -> Vec<(&'static str, &'static str, String)> {
        let s = &self.eval.space;
        let range_i = |r: IntRange| format!("{}..{}", r.lo, r.hi);
        let range_l = |r: LogRange| format!("{}..{}", r.lo, r.hi);
        vec![
            ("dataset", "path", show_opt(self.dataset.as_ref().map(|p| p.display()))),
            ("dataset", "emg_column", self.ingest.emg_column.clone()),
            ("dataset", "knee_column", self.ingest.knee_column.clone()),
            ("dataset", "sample_rate_hz", self.ingest.sample_rate_hz.to_string()),
            ("dataset", "exercise", self.ingest.exercise.clone()),
            ("dataset", "include_abnormal", self.ingest.include_abnormal.to_string()),
            ("dataset", "delimiter", self.ingest.delimiter.name().into()),
            ("screening", "p95_threshold", self.p95_threshold.to_string()),
            ("filter", "low_cut_hz", self.preprocess.bandpass.low_cut_hz.to_string()),
            ("filter", "high_cut_hz", self.preprocess.bandpass.high_cut_hz.to_string()),
            ("filter", "order", self.preprocess.bandpass.order.to_string()),
            ("filter", "zero_phase", self.preprocess.bandpass.zero_phase.to_string()),
            ("labeling", "knee_cut_hz", self.preprocess.knee_cut_hz.to_string()),
            ("labeling", "knee_order", self.preprocess.knee_order.to_string()),
            ("labeling", "min_prominence", self.preprocess.min_prominence.to_string()),
            ("labeling", "min_separation_ms", self.preprocess.min_separation_ms.to_string()),
            ("labeling", "convention", self.preprocess.convention.tag().into()),
            ("grid", "windows_ms", join(&self.grid.windows_ms)),
            ("grid", "delays_ms", join(&self.grid.delays_ms)),
            ("grid", "stride_ms", self.grid.stride_ms.to_string()),
            ("search", "models", self.models.iter().map(|m| m.short_name()).collect::<Vec<_>>().join(",")),
            ("search", "budget", self.eval.budget.to_string()),
            ("search", "seed", self.eval.seed.to_string()),
            (
                "search",
                "protocol",
                match self.eval.protocol {
                    Protocol::Flat => "flat".into(),
                    Protocol::Nested => "nested".into(),
                },
            ),
            ("search", "svm_max_train_rows", show_opt(self.eval.train.svm_max_train_rows)),
            ("search", "permute_labels", show_opt(self.eval.permute_labels)),
            ("search", "nb_var_smoothing", range_l(s.nb_var_smoothing)),
            ("search", "dt_max_depth", range_i(s.dt_max_depth)),
            ("search", "dt_min_samples_leaf", range_i(s.dt_min_samples_leaf)),
            ("search", "rf_trees", range_i(s.rf_trees)),
            ("search", "rf_max_depth", range_i(s.rf_max_depth)),
            ("search", "rf_min_samples_leaf", range_i(s.rf_min_samples_leaf)),
            ("search", "gbm_rounds", range_i(s.gbm_rounds)),
            ("search", "gbm_learning_rate", range_l(s.gbm_learning_rate)),
            ("search", "gbm_max_depth", s.gbm_max_depth.to_string()),
            ("search", "svm_c", range_l(s.svm_c)),
            ("search", "svm_gamma", range_l(s.svm_gamma)),
            (
                "search",
                "svm_kernel",
                match s.svm_kernel {
                    SvmKernelChoice::Rbf => "rbf".into(),
                    SvmKernelChoice::Linear => "linear".into(),
                },
            ),
            ("search", "knn_k", range_i(s.knn_k)),
            ("replay", "latency_budget_ms", self.latency_budget_ms.to_string()),
            ("output", "dir", self.out_dir.display().to_string()),
            ("output", "jobs", self.jobs.to_string()),
        ]
    }

    /// Settings that determine results, as `section.key = value` pairs.
    /// Output location and thread count are left out: they never change
    /// a number.
    pub fn snapshot(&self) -> Vec<(String, String)> {
        self.entries()
            .into_iter()
            .filter(|(section, _, _)| *section != "output")
            .map(|(section, key, value)| (format!("{section}.{key}"), value))
            .collect()
    }

    pub fn to_ini_string(&self) -> String {
        let mut out = String::new();
        let mut current = "";
        for (section, key, value) in self.entries() {
            if section != current {
                if !current.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{section}]");
                current = section;
            }
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_grids() {
        assert_eq!(parse_list("300").unwrap(), vec![300.0]);
        assert_eq!(parse_list("0:40:10").unwrap(), vec![0.0, 10.0, 20.0, 30.0, 40.0]);
        assert_eq!(parse_list("50:400:25").unwrap().len(), 15);
        assert_eq!(parse_list("0:100:10").unwrap().len(), 11);
        assert_eq!(parse_grid("275,300x0,10").unwrap(), (vec![275.0, 300.0], vec![0.0, 10.0]));
        assert!(parse_grid("300").is_err());
        assert!(parse_list("5:1:1").is_err());
        assert!(parse_list("a").is_err());
    }

    #[test]
    fn models() {
        assert_eq!(parse_models("svm").unwrap(), vec![ModelKind::Svm]);
        assert_eq!(parse_models("knn, nb,svm,nb").unwrap(), vec![ModelKind::GaussianNb, ModelKind::Svm, ModelKind::Knn]);
        assert_eq!(parse_models("all").unwrap().len(), 6);
        assert!(parse_models("mlp").is_err());
    }

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::default();
        cfg.dataset = Some("/tmp/data".into());
        cfg.eval.seed = 99;
        cfg.eval.permute_labels = Some(3);
        cfg.eval.space.svm_c = LogRange::new(0.5, 2.0);
        cfg.grid = SweepGrid::quick();
        cfg.models = vec![ModelKind::Svm, ModelKind::Knn];
        let back = RunConfig::from_ini_str(&cfg.to_ini_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::from_ini_str("").unwrap(), RunConfig::default());
    }

    #[test]
    fn errors_name_the_key() {
        let e = RunConfig::from_ini_str("[search]\nbudget = lots\n").unwrap_err();
        assert!(e.to_string().contains("budget"));
        let e = RunConfig::from_ini_str("[search]\nbudgte = 3\n").unwrap_err();
        assert!(matches!(e, ConfigError::UnknownKey { .. }));
    }

    #[test]
    fn snapshot_skips_output() {
        let cfg = RunConfig::default();
        let snap = cfg.snapshot();
        assert!(snap.iter().all(|(k, _)| !k.starts_with("output.")));
        assert!(snap.iter().any(|(k, v)| k == "search.seed" && v == "1"));
    }
}
