//! Parallel execution of the sweep and the per-subject preparation.

use gaitphase_core::classifiers::ModelKind;
use gaitphase_core::dataset::GaitRecording;
use gaitphase_core::evaluation::{evaluate_model, make_folds, CellData, NoAudit, SweepCell, SweepReport};
use gaitphase_core::preprocess::{prepare_subject, PreprocessParams, SubjectData};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFailure {
    pub window_ms: f64,
    pub delay_ms: f64,
    pub model: ModelKind,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub report: SweepReport,
    pub failures: Vec<CellFailure>,
}

pub fn thread_pool(jobs: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

/// Filters, normalizes and labels each recording; output keeps input order.
pub fn prepare_all(recordings: &[&GaitRecording], params: &PreprocessParams) -> anyhow::Result<Vec<SubjectData>> {
    recordings
        .par_iter()
        .map(|r| prepare_subject(r, params).map_err(|e| anyhow::anyhow!("subject {}: {e}", r.subject_id)))
        .collect()
}

/// Evaluates every cell of the configured grid. Cells run in parallel and
/// are merged by coordinate, so the report does not depend on scheduling
/// or thread count. A failing cell is recorded and the rest carry on.
pub fn run_sweep(cfg: &RunConfig, subjects: &[SubjectData]) -> anyhow::Result<SweepOutcome> {
    anyhow::ensure!(!cfg.grid.is_empty(), "empty sweep grid");
    anyhow::ensure!(!cfg.models.is_empty(), "no models selected");
    let ids: Vec<u32> = subjects.iter().map(|s| s.subject_id).collect();
    let folds = make_folds(&ids)?;
    let specs = cfg.grid.specs();
    let results: Vec<Result<SweepCell, CellFailure>> = thread_pool(cfg.jobs)?.install(|| {
        specs
            .par_iter()
            .flat_map_iter(|spec| {
                let data = CellData::build(*spec, subjects).map(|mut d| {
                    if let Some(s) = cfg.eval.permute_labels {
                        d.permute_labels(s);
                    }
                    d
                });
                let fail = move |model: ModelKind, e: &dyn std::fmt::Display| CellFailure {
                    window_ms: spec.window_ms,
                    delay_ms: spec.delay_ms,
                    model,
                    error: e.to_string(),
                };
                let out: Vec<Result<SweepCell, CellFailure>> = match data {
                    Err(e) => cfg.models.iter().map(|&m| Err(fail(m, &e))).collect(),
                    Ok(data) => cfg
                        .models
                        .par_iter()
                        .map(|&m| evaluate_model(&data, m, &folds, &cfg.eval, &NoAudit).map_err(|e| fail(m, &e)))
                        .collect(),
                };
                out
            })
            .collect()
    });
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(c) => cells.push(c),
            Err(f) => failures.push(f),
        }
    }
    Ok(SweepOutcome { report: SweepReport::assemble(cells, cfg.eval.seed, cfg.snapshot()), failures })
}
