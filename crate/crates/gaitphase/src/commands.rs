//! The four pipeline commands behind the CLI, plus synthetic data output.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use gaitphase_core::classifiers::search::random_search;
use gaitphase_core::classifiers::ModelKind;
use gaitphase_core::dataset::{screen_subjects, GaitRecording, ScreeningReport};
use gaitphase_core::evaluation::{
    batch_scores, fit_fold, make_folds, prepare_fold, replay_stream, roc_auc, CellData, Fold, NoAudit, Stage,
};
use gaitphase_core::windowing::{segment, FeatureMatrix, WindowSpec};
use log::{info, warn};

use crate::config::RunConfig;
use crate::ingest::ingest_dataset;
use crate::report;
use crate::runner;
use crate::synthetic::{self, SyntheticSpec};
use crate::InstantClock;

/// Error split by exit code: usage and I/O problems versus failures inside
/// the pipeline itself.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Pipeline(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Pipeline(_) => 1,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Pipeline(e) => e,
        }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn pipeline(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Pipeline(e.into())
}

fn load(cfg: &RunConfig) -> CmdResult<(Vec<GaitRecording>, ScreeningReport)> {
    let root = cfg.dataset.as_deref().ok_or_else(|| usage(anyhow!("no dataset path; pass --dataset or set [dataset] path")))?;
    let recordings = ingest_dataset(root, &cfg.ingest).map_err(usage)?;
    info!("ingested {} recordings from {}", recordings.len(), root.display());
    let screening = screen_subjects(&recordings, cfg.p95_threshold);
    Ok((recordings, screening))
}

fn prepare_out(cfg: &RunConfig) -> CmdResult<&Path> {
    std::fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display())).map_err(usage)?;
    report::write_config_snapshot(&cfg.out_dir.join("config.ini"), &cfg.to_ini_string())
        .context("writing config snapshot")
        .map_err(usage)?;
    Ok(&cfg.out_dir)
}

pub fn screen(cfg: &RunConfig) -> CmdResult<ScreeningReport> {
    let (_, screening) = load(cfg)?;
    print!("{}", screening.table());
    let excluded: Vec<String> = screening.excluded_subjects.iter().map(u32::to_string).collect();
    println!("excluded (p95 < {}): {{{}}}", cfg.p95_threshold, excluded.join(", "));
    let out = prepare_out(cfg)?;
    report::write_screening_csv(&out.join("screening.csv"), &screening, &cfg.snapshot()).map_err(usage)?;
    Ok(screening)
}

pub fn sweep(cfg: &RunConfig) -> CmdResult<runner::SweepOutcome> {
    let (recordings, screening) = load(cfg)?;
    let retained: Vec<&GaitRecording> = gaitphase_core::dataset::retained(&recordings, &screening);
    for (s, why) in &screening.exclusion_reasons {
        warn!("subject {s} excluded: {why}");
    }
    let subjects = runner::prepare_all(&retained, &cfg.preprocess).map_err(pipeline)?;
    info!(
        "sweeping {} cells x {} models over {} subjects",
        cfg.grid.len(),
        cfg.models.len(),
        subjects.len()
    );
    let outcome = runner::run_sweep(cfg, &subjects).map_err(pipeline)?;
    let out = prepare_out(cfg)?;
    report::write_sweep_outputs(out, &outcome.report, &outcome.failures).map_err(usage)?;
    print!("{}", report::best_table(&outcome.report));
    for w in outcome.report.warnings() {
        warn!("{w}");
    }
    if !outcome.failures.is_empty() {
        for f in &outcome.failures {
            eprintln!("cell (window {} ms, delay {} ms, {}) failed: {}", f.window_ms, f.delay_ms, f.model, f.error);
        }
        return Err(pipeline(anyhow!("{} of {} cells failed", outcome.failures.len(), cfg.grid.len() * cfg.models.len())));
    }
    Ok(outcome)
}

fn single_cell(cfg: &RunConfig) -> CmdResult<WindowSpec> {
    match cfg.grid.specs().as_slice() {
        [spec] => Ok(*spec),
        specs => Err(usage(anyhow!("this command needs a single cell, the grid has {}; pass --grid WINDOWxDELAY", specs.len()))),
    }
}

fn single_model(cfg: &RunConfig) -> CmdResult<ModelKind> {
    match cfg.models.as_slice() {
        [m] => Ok(*m),
        ms => Err(usage(anyhow!("this command needs one model, {} selected; pass --models NAME", ms.len()))),
    }
}

/// Checks that `subject` was ingested; excluded subjects need `force`.
fn check_subject(subject: u32, recordings: &[GaitRecording], screening: &ScreeningReport, force: bool) -> CmdResult {
    if !recordings.iter().any(|r| r.subject_id == subject) {
        let known: Vec<String> = recordings.iter().map(|r| r.subject_id.to_string()).collect();
        return Err(usage(anyhow!("unknown subject {subject}; dataset has {}", known.join(", "))));
    }
    if screening.is_excluded(subject) {
        let why = screening.exclusion_reasons.get(&subject).cloned().unwrap_or_default();
        if !force {
            return Err(usage(anyhow!("subject {subject} was excluded by screening ({why}); pass --force to use it anyway")));
        }
        warn!("subject {subject} was excluded by screening ({why}); continuing because of --force");
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySummary {
    pub subject: u32,
    pub windows: usize,
    pub median_latency_ms: f64,
    pub max_latency_ms: f64,
    pub auc: Option<f64>,
    pub csv: PathBuf,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Trains on every other retained subject at the configured cell, then
/// streams `subject` through the model one sample at a time.
pub fn replay(cfg: &RunConfig, subject: u32, force: bool) -> CmdResult<ReplaySummary> {
    let spec = single_cell(cfg)?;
    let kind = single_model(cfg)?;
    let (recordings, screening) = load(cfg)?;
    check_subject(subject, &recordings, &screening, force)?;
    let mut chosen: Vec<&GaitRecording> =
        recordings.iter().filter(|r| r.subject_id != subject && !screening.is_excluded(r.subject_id)).collect();
    let train_ids: Vec<u32> = chosen.iter().map(|r| r.subject_id).collect();
    if train_ids.len() < 2 {
        return Err(pipeline(anyhow!("replay needs at least two training subjects besides {subject}")));
    }
    chosen.extend(recordings.iter().filter(|r| r.subject_id == subject));
    let subjects = runner::prepare_all(&chosen, &cfg.preprocess).map_err(pipeline)?;
    let data = CellData::build(spec, &subjects).map_err(pipeline)?;

    let inner = make_folds(&train_ids).map_err(pipeline)?;
    let inner_prepared = inner
        .folds
        .iter()
        .map(|f| prepare_fold(&data, f, &[subject], &NoAudit))
        .collect::<Result<Vec<_>, _>>()
        .map_err(pipeline)?;
    let search = random_search(kind, &cfg.eval.space, &inner_prepared, cfg.eval.budget, cfg.eval.seed, &cfg.eval.train, &NoAudit)
        .map_err(pipeline)?;
    info!("replay model {} (inner mean AUC {:.3})", search.best, search.mean_auc);
    let outer = prepare_fold(&data, &Fold { train: train_ids, test: subject }, &[], &NoAudit).map_err(pipeline)?;
    let (model, _) = fit_fold(&search.best, &outer, cfg.eval.seed, &cfg.eval.train, &NoAudit, Stage::FinalTrain).map_err(pipeline)?;

    let test = subjects.iter().find(|s| s.subject_id == subject).expect("subject prepared above");
    let events = replay_stream(&test.emg, &model, &outer.scaler, &spec, &InstantClock::new()).map_err(pipeline)?;
    let batch = batch_scores(&test.emg, &model, &outer.scaler, &spec).map_err(pipeline)?;

    let out = prepare_out(cfg)?;
    let csv = out.join(format!("replay_subject{subject}.csv"));
    report::write_replay_csv(&csv, &events, &cfg.snapshot()).map_err(usage)?;

    let identical = events.len() == batch.len()
        && events.iter().zip(&batch).all(|(e, (t, s))| e.time_ms == *t && e.score.to_bits() == s.to_bits());
    if !identical {
        return Err(pipeline(anyhow!("replay scores differ from batch scores for subject {subject}")));
    }

    // Labels of the emitted windows, where the delayed label exists.
    let labelled = segment(&test.emg, &test.phases, &spec, subject).map_err(pipeline)?;
    let scores: Vec<f64> = events.iter().take(labelled.len()).map(|e| e.score).collect();
    let auc = roc_auc(&scores, &labelled.labels()).ok();
    let latencies: Vec<f64> = events.iter().map(|e| e.latency_ms).collect();
    let summary = ReplaySummary {
        subject,
        windows: events.len(),
        median_latency_ms: median(latencies.clone()),
        max_latency_ms: latencies.iter().copied().fold(0.0, f64::max),
        auc,
        csv,
    };
    println!(
        "subject {}: {} windows, replay == batch, median latency {:.4} ms (max {:.4} ms), AUC {}",
        summary.subject,
        summary.windows,
        summary.median_latency_ms,
        summary.max_latency_ms,
        summary.auc.map_or_else(|| "undefined".into(), |a| format!("{a:.3}"))
    );
    if summary.median_latency_ms >= cfg.latency_budget_ms {
        warn!("median latency {} ms is over the {} ms budget", summary.median_latency_ms, cfg.latency_budget_ms);
    }
    Ok(summary)
}

/// Dumps the unscaled feature matrix of one cell for one or all retained
/// subjects.
pub fn features(cfg: &RunConfig, subject: Option<u32>, force: bool) -> CmdResult<FeatureMatrix> {
    let spec = single_cell(cfg)?;
    let (recordings, screening) = load(cfg)?;
    let chosen: Vec<&GaitRecording> = match subject {
        Some(s) => {
            check_subject(s, &recordings, &screening, force)?;
            recordings.iter().filter(|r| r.subject_id == s).collect()
        }
        None => gaitphase_core::dataset::retained(&recordings, &screening),
    };
    let subjects = runner::prepare_all(&chosen, &cfg.preprocess).map_err(pipeline)?;
    let parts = subjects
        .iter()
        .map(|s| segment(&s.emg, &s.phases, &spec, s.subject_id))
        .collect::<Result<Vec<_>, _>>()
        .map_err(pipeline)?;
    let matrix = FeatureMatrix::concat(&parts).map_err(pipeline)?;
    let out = prepare_out(cfg)?;
    let name = match subject {
        Some(s) => format!("features_w{}_d{}_subject{s}.csv", spec.window_ms, spec.delay_ms),
        None => format!("features_w{}_d{}.csv", spec.window_ms, spec.delay_ms),
    };
    report::write_features_csv(&out.join(&name), &matrix, &cfg.snapshot()).map_err(usage)?;
    println!("{} rows written to {}", matrix.len(), out.join(name).display());
    Ok(matrix)
}

pub fn synth(dir: &Path, spec: &SyntheticSpec) -> CmdResult<Vec<PathBuf>> {
    let files = synthetic::write_dataset(dir, spec).with_context(|| format!("writing {}", dir.display())).map_err(usage)?;
    println!("{} files written under {}", files.len(), dir.display());
    Ok(files)
}
