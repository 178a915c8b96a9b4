//! Subject-wise cross-validation, ROC-AUC, the window × delay × model sweep
//! and streaming replay.

mod auc;
mod folds;
mod replay;
mod sweep;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::classifiers::search::{mean_defined, random_search, SearchSpace};
use crate::classifiers::{self, HyperParams, ModelKind, Samples, TrainedModel};
use crate::error::{Error, Result};
use crate::preprocess::SubjectData;
use crate::seed;
use crate::windowing::{self, FeatureMatrix, ScalerParams, WindowSpec};

pub use auc::roc_auc;
pub use folds::{make_folds, Fold, SubjectFolds};
pub use replay::{batch_scores, replay_stream, Clock, NoClock, ReplayEvent, StreamingScorer};
pub use sweep::{run_sweep, Heatmap, SweepGrid, SweepReport};

/// Which part of a fold is reading training rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    ScalerFit,
    SearchTrain,
    FinalTrain,
}

/// Observer of every training-side data access. `held_out` lists the
/// subjects that must not appear among `subjects`.
pub trait FoldAudit: Sync {
    fn record(&self, held_out: &[u32], stage: Stage, subjects: &[u32]);
}

pub struct NoAudit;

impl FoldAudit for NoAudit {
    fn record(&self, _: &[u32], _: Stage, _: &[u32]) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TrainOptions {
    /// Stratified cap on SVM training rows; `None` trains on everything.
    pub svm_max_train_rows: Option<usize>,
}

/// One fold with its scaler already fitted on, and applied to, its rows.
#[derive(Debug, Clone)]
pub struct PreparedFold {
    pub test_subject: u32,
    /// The test subject followed by any enclosing held-out subjects.
    pub held_out: Vec<u32>,
    pub scaler: ScalerParams,
    pub train: Samples,
    pub test: Samples,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub auc: Option<f64>,
    pub scores: Vec<f64>,
}

/// Feature matrices of every subject at one window spec, sorted by subject.
#[derive(Debug, Clone, PartialEq)]
pub struct CellData {
    pub spec: WindowSpec,
    pub subjects: Vec<u32>,
    pub matrices: Vec<FeatureMatrix>,
}

impl CellData {
    pub fn build(spec: WindowSpec, subjects: &[SubjectData]) -> Result<Self> {
        let mut order: Vec<&SubjectData> = subjects.iter().collect();
        order.sort_by_key(|s| s.subject_id);
        if order.windows(2).any(|w| w[0].subject_id == w[1].subject_id) {
            return Err(Error::InvalidArgument("duplicate subject ids".into()));
        }
        let matrices = order
            .iter()
            .map(|s| windowing::segment(&s.emg, &s.phases, &spec, s.subject_id))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spec, subjects: order.iter().map(|s| s.subject_id).collect(), matrices })
    }

    pub fn matrix(&self, subject: u32) -> Option<&FeatureMatrix> {
        self.subjects.binary_search(&subject).ok().map(|i| &self.matrices[i])
    }

    /// Shuffles labels within each subject, destroying any EMG-label link
    /// while keeping class balance per subject.
    pub fn permute_labels(&mut self, seed: u64) {
        for (s, m) in self.subjects.iter().zip(&mut self.matrices) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, &[u64::from(*s)]));
            let mut labels = m.labels();
            labels.shuffle(&mut rng);
            for (r, l) in m.rows.iter_mut().zip(labels) {
                r.label = l;
            }
        }
    }

    fn gather(&self, ids: &[u32]) -> Result<FeatureMatrix> {
        let parts = ids
            .iter()
            .map(|&id| self.matrix(id).ok_or_else(|| Error::InvalidArgument(format!("unknown subject {id}"))))
            .collect::<Result<Vec<_>>>()?;
        FeatureMatrix::concat(parts)
    }
}

/// Fits the scaler on the fold's training subjects only and scales both
/// sides with it.
pub fn prepare_fold(data: &CellData, fold: &Fold, enclosing: &[u32], audit: &dyn FoldAudit) -> Result<PreparedFold> {
    let mut held_out = alloc::vec![fold.test];
    held_out.extend_from_slice(enclosing);
    let train = data.gather(&fold.train)?;
    let test = data.gather(&[fold.test])?;
    audit.record(&held_out, Stage::ScalerFit, &distinct(train.rows.iter().map(|r| r.subject)));
    let scaler = windowing::fit_scaler(&train)?;
    Ok(PreparedFold {
        test_subject: fold.test,
        held_out,
        scaler,
        train: Samples::from_matrix(&windowing::apply_scaler(&train, &scaler))?,
        test: Samples::from_matrix(&windowing::apply_scaler(&test, &scaler))?,
    })
}

fn distinct(ids: impl Iterator<Item = u32>) -> Vec<u32> {
    let mut v: Vec<u32> = ids.collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Class-stratified subsample of at most `cap` rows, original order kept.
pub fn stratified_subsample(data: &Samples, cap: usize, seed: u64) -> Samples {
    if data.len() <= cap {
        return data.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = data.len();
    let mut keep = Vec::with_capacity(cap);
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..n).filter(|&i| data.labels()[i] == class).collect();
        if idx.is_empty() {
            continue;
        }
        let share = ((cap as f64 * idx.len() as f64 / n as f64) + 0.5) as usize;
        let take = share.clamp(1, idx.len());
        let (chosen, _) = idx.partial_shuffle(&mut rng, take);
        keep.extend_from_slice(chosen);
    }
    keep.sort_unstable();
    data.select(&keep)
}

/// Trains `params` on the fold's training rows and scores its test rows.
/// A single-class test subject gives `auc: None`.
pub fn evaluate_fold(
    params: &HyperParams,
    fold: &PreparedFold,
    seed: u64,
    options: &TrainOptions,
    audit: &dyn FoldAudit,
    stage: Stage,
) -> Result<FoldResult> {
    let (model, _) = fit_fold(params, fold, seed, options, audit, stage)?;
    let scores = model.score_samples(&fold.test)?;
    let auc = match roc_auc(&scores, fold.test.labels()) {
        Ok(a) => Some(a),
        Err(Error::AucUndefined) => None,
        Err(e) => return Err(e),
    };
    Ok(FoldResult { auc, scores })
}

/// Fits a model on a prepared fold, applying the SVM row cap.
pub fn fit_fold(
    params: &HyperParams,
    fold: &PreparedFold,
    seed: u64,
    options: &TrainOptions,
    audit: &dyn FoldAudit,
    stage: Stage,
) -> Result<(TrainedModel, usize)> {
    let capped;
    let train = match (params.kind(), options.svm_max_train_rows) {
        (ModelKind::Svm, Some(cap)) if fold.train.len() > cap => {
            capped = stratified_subsample(&fold.train, cap, seed::derive(seed, &[0xCA9]));
            &capped
        }
        _ => &fold.train,
    };
    audit.record(&fold.held_out, stage, &train.distinct_subjects());
    let model = classifiers::train(params.kind(), params, train, seed)?;
    Ok((model, train.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Protocol {
    /// Hyperparameters chosen by mean AUC over the same subject folds that
    /// are reported.
    #[default]
    Flat,
    /// Hyperparameters chosen per outer fold by an inner subject-wise
    /// search on that fold's training subjects only.
    Nested,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EvalConfig {
    pub budget: usize,
    pub seed: u64,
    pub space: SearchSpace,
    pub protocol: Protocol,
    pub train: TrainOptions,
    /// Shuffle labels within subject before evaluating (null check).
    pub permute_labels: Option<u64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            budget: 20,
            seed: 0,
            space: SearchSpace::default(),
            protocol: Protocol::Flat,
            train: TrainOptions { svm_max_train_rows: Some(20_000) },
            permute_labels: None,
        }
    }
}

/// Result of one (window, delay, model) combination.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SweepCell {
    pub window_ms: f64,
    pub delay_ms: f64,
    pub kind: ModelKind,
    /// Held-out subject of each fold.
    pub fold_subjects: Vec<u32>,
    pub per_fold_auc: Vec<Option<f64>>,
    /// Mean over folds with a defined AUC.
    pub mean_auc: f64,
    /// AUC of all held-out scores pooled across folds.
    pub pooled_auc: Option<f64>,
    pub winning_params: HyperParams,
    /// Parameters used on each fold (all equal under the flat protocol).
    pub fold_params: Vec<HyperParams>,
    pub warnings: Vec<String>,
}

pub(crate) fn cell_seed(seed: u64, spec: &WindowSpec, kind: ModelKind) -> u64 {
    seed::derive(seed, &[spec.window_ms.to_bits(), spec.delay_ms.to_bits(), kind.index() as u64])
}

/// Evaluates one model on prebuilt cell data.
pub fn evaluate_model(
    data: &CellData,
    kind: ModelKind,
    folds: &SubjectFolds,
    cfg: &EvalConfig,
    audit: &dyn FoldAudit,
) -> Result<SweepCell> {
    let cseed = cell_seed(cfg.seed, &data.spec, kind);
    let (per_fold_auc, fold_scores, fold_params, winning_params) = match cfg.protocol {
        Protocol::Flat => {
            let prepared = folds
                .folds
                .iter()
                .map(|f| prepare_fold(data, f, &[], audit))
                .collect::<Result<Vec<_>>>()?;
            let out = random_search(kind, &cfg.space, &prepared, cfg.budget, cseed, &cfg.train, audit)?;
            let params = alloc::vec![out.best; folds.k];
            (out.fold_aucs, out.fold_scores, params, out.best)
        }
        Protocol::Nested => nested(data, kind, folds, cfg, cseed, audit)?,
    };

    let mut warnings = Vec::new();
    for (fold, auc) in folds.folds.iter().zip(&per_fold_auc) {
        if auc.is_none() {
            warnings.push(format!(
                "subject {} has a single class at window {} ms, delay {} ms; fold excluded from the mean",
                fold.test, data.spec.window_ms, data.spec.delay_ms
            ));
        }
    }
    let mean_auc = mean_defined(&per_fold_auc).ok_or(Error::NoEvaluableFolds)?;
    let mut pooled_scores = Vec::new();
    let mut pooled_labels = Vec::new();
    for (fold, scores) in folds.folds.iter().zip(&fold_scores) {
        pooled_scores.extend_from_slice(scores);
        pooled_labels.extend(data.matrix(fold.test).map(|m| m.labels()).unwrap_or_default());
    }
    let pooled_auc = roc_auc(&pooled_scores, &pooled_labels).ok();

    Ok(SweepCell {
        window_ms: data.spec.window_ms,
        delay_ms: data.spec.delay_ms,
        kind,
        fold_subjects: folds.subjects(),
        per_fold_auc,
        mean_auc,
        pooled_auc,
        winning_params,
        fold_params,
        warnings,
    })
}

type FoldOutcomes = (Vec<Option<f64>>, Vec<Vec<f64>>, Vec<HyperParams>, HyperParams);

fn nested(
    data: &CellData,
    kind: ModelKind,
    folds: &SubjectFolds,
    cfg: &EvalConfig,
    cseed: u64,
    audit: &dyn FoldAudit,
) -> Result<FoldOutcomes> {
    let mut aucs = Vec::with_capacity(folds.k);
    let mut scores = Vec::with_capacity(folds.k);
    let mut params = Vec::with_capacity(folds.k);
    for (i, outer) in folds.folds.iter().enumerate() {
        let inner = make_folds(&outer.train)?;
        let prepared = inner
            .folds
            .iter()
            .map(|f| prepare_fold(data, f, &[outer.test], audit))
            .collect::<Result<Vec<_>>>()?;
        let fseed = seed::derive(cseed, &[i as u64]);
        let out = random_search(kind, &cfg.space, &prepared, cfg.budget, fseed, &cfg.train, audit)?;
        let outer_prepared = prepare_fold(data, outer, &[], audit)?;
        let res = evaluate_fold(&out.best, &outer_prepared, seed::derive(fseed, &[0xF1]), &cfg.train, audit, Stage::FinalTrain)?;
        aucs.push(res.auc);
        scores.push(res.scores);
        params.push(out.best);
    }
    // Report the most frequent choice, earliest fold on ties.
    let winning = params
        .iter()
        .max_by_key(|p| (params.iter().filter(|q| q == p).count(), core::cmp::Reverse(params.iter().position(|q| q == *p))))
        .copied()
        .ok_or(Error::Empty("no folds"))?;
    Ok((aucs, scores, params, winning))
}

/// Segments every subject at `spec` and evaluates `kind`; errors carry the
/// cell coordinates.
pub fn evaluate_cell(
    spec: WindowSpec,
    kind: ModelKind,
    subjects: &[SubjectData],
    folds: &SubjectFolds,
    cfg: &EvalConfig,
    audit: &dyn FoldAudit,
) -> Result<SweepCell> {
    let run = || {
        let mut data = CellData::build(spec, subjects)?;
        if let Some(s) = cfg.permute_labels {
            data.permute_labels(s);
        }
        evaluate_model(&data, kind, folds, cfg, audit)
    };
    run().map_err(|e| e.in_cell(spec.window_ms, spec.delay_ms, kind))
}
