//! The six classifier families behind one train/score contract.
//!
//! Every trained model maps a feature row to a finite score where higher
//! means more stance-like (label 1). Scores feed ROC-AUC only, so they need
//! not be calibrated probabilities.

mod boosting;
mod forest;
mod knn;
mod naive_bayes;
pub mod search;
pub mod svm;
mod tree;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::windowing::{FeatureMatrix, N_FEATURES};

pub use boosting::GradientBoosting;
pub use forest::RandomForest;
pub use knn::Knn;
pub use naive_bayes::GaussianNb;
pub use svm::{Kernel, Svm};
pub use tree::DecisionTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ModelKind {
    GaussianNb,
    DecisionTree,
    RandomForest,
    GradientBoosting,
    Svm,
    Knn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::GaussianNb,
        ModelKind::DecisionTree,
        ModelKind::RandomForest,
        ModelKind::GradientBoosting,
        ModelKind::Svm,
        ModelKind::Knn,
    ];

    /// Short name as used on the command line and in reports.
    pub fn short_name(self) -> &'static str {
        match self {
            ModelKind::GaussianNb => "nb",
            ModelKind::DecisionTree => "dt",
            ModelKind::RandomForest => "rf",
            ModelKind::GradientBoosting => "gbm",
            ModelKind::Svm => "svm",
            ModelKind::Knn => "knn",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::GaussianNb => "NB",
            ModelKind::DecisionTree => "DT",
            ModelKind::RandomForest => "RF",
            ModelKind::GradientBoosting => "GBM",
            ModelKind::Svm => "SVM",
            ModelKind::Knn => "KNN",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let lower = name.trim().to_ascii_lowercase();
        Self::ALL.into_iter().find(|k| {
            k.short_name() == lower
                || match k {
                    ModelKind::GaussianNb => lower == "gaussian_nb",
                    ModelKind::DecisionTree => lower == "decision_tree",
                    ModelKind::RandomForest => lower == "random_forest",
                    ModelKind::GradientBoosting => lower == "gb" || lower == "gradient_boosting",
                    ModelKind::Svm => false,
                    ModelKind::Knn => false,
                }
        })
    }

    /// Stable position used for ordering and seed derivation.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl core::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.display_name())
    }
}

/// Features considered at each split of a forest tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MaxFeatures {
    Sqrt,
    All,
}

impl MaxFeatures {
    pub(crate) fn count(self, n_features: usize) -> usize {
        match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => (crate::math::floor(crate::math::sqrt(n_features as f64)) as usize).clamp(1, n_features),
        }
    }
}

/// Kind-tagged hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum HyperParams {
    GaussianNb { var_smoothing: f64 },
    DecisionTree { max_depth: usize, min_samples_leaf: usize },
    RandomForest { n_trees: usize, max_depth: usize, min_samples_leaf: usize, max_features: MaxFeatures, bootstrap: bool },
    GradientBoosting { n_rounds: usize, learning_rate: f64, max_depth: usize },
    Svm { c: f64, kernel: Kernel },
    Knn { k: usize },
}

impl HyperParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            HyperParams::GaussianNb { .. } => ModelKind::GaussianNb,
            HyperParams::DecisionTree { .. } => ModelKind::DecisionTree,
            HyperParams::RandomForest { .. } => ModelKind::RandomForest,
            HyperParams::GradientBoosting { .. } => ModelKind::GradientBoosting,
            HyperParams::Svm { .. } => ModelKind::Svm,
            HyperParams::Knn { .. } => ModelKind::Knn,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        match *self {
            HyperParams::GaussianNb { var_smoothing } if !(var_smoothing >= 0.0 && var_smoothing.is_finite()) => {
                bad(format!("var_smoothing {var_smoothing}"))
            }
            HyperParams::DecisionTree { max_depth, min_samples_leaf }
            | HyperParams::RandomForest { max_depth, min_samples_leaf, .. }
                if max_depth == 0 || min_samples_leaf == 0 =>
            {
                bad(format!("max_depth {max_depth}, min_samples_leaf {min_samples_leaf}"))
            }
            HyperParams::RandomForest { n_trees: 0, .. } => bad("forest needs at least one tree".into()),
            HyperParams::GradientBoosting { learning_rate, max_depth, .. }
                if !(learning_rate > 0.0 && learning_rate <= 1.0) || max_depth == 0 =>
            {
                bad(format!("learning_rate {learning_rate}, max_depth {max_depth}"))
            }
            HyperParams::Svm { c, kernel } => {
                if !(c > 0.0 && c.is_finite()) {
                    return bad(format!("C {c}"));
                }
                match kernel {
                    Kernel::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => bad(format!("gamma {gamma}")),
                    _ => Ok(()),
                }
            }
            HyperParams::Knn { k: 0 } => bad("K must be positive".into()),
            _ => Ok(()),
        }
    }
}

impl core::fmt::Display for HyperParams {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            HyperParams::GaussianNb { var_smoothing } => write!(f, "var_smoothing={var_smoothing:.3e}"),
            HyperParams::DecisionTree { max_depth, min_samples_leaf } => {
                write!(f, "max_depth={max_depth} min_samples_leaf={min_samples_leaf}")
            }
            HyperParams::RandomForest { n_trees, max_depth, min_samples_leaf, max_features, bootstrap } => write!(
                f,
                "n_trees={n_trees} max_depth={max_depth} min_samples_leaf={min_samples_leaf} max_features={max_features:?} bootstrap={bootstrap}"
            ),
            HyperParams::GradientBoosting { n_rounds, learning_rate, max_depth } => {
                write!(f, "n_rounds={n_rounds} learning_rate={learning_rate:.4} max_depth={max_depth}")
            }
            HyperParams::Svm { c, kernel: Kernel::Rbf { gamma } } => write!(f, "C={c:.4} kernel=rbf gamma={gamma:.4}"),
            HyperParams::Svm { c, kernel: Kernel::Linear } => write!(f, "C={c:.4} kernel=linear"),
            HyperParams::Knn { k } => write!(f, "k={k}"),
        }
    }
}

/// Dense training/scoring rows: row-major features, binary labels and the
/// subject each row came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    x: Vec<f64>,
    y: Vec<u8>,
    subjects: Vec<u32>,
    n_features: usize,
}

impl Samples {
    pub fn new(x: Vec<f64>, y: Vec<u8>, n_features: usize) -> Result<Self> {
        let subjects = alloc::vec![0; y.len()];
        Self::with_subjects(x, y, subjects, n_features)
    }

    pub fn with_subjects(x: Vec<f64>, y: Vec<u8>, subjects: Vec<u32>, n_features: usize) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::InvalidArgument("zero features".into()));
        }
        if x.len() != y.len() * n_features || subjects.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: y.len() * n_features, got: x.len() });
        }
        if y.iter().any(|&l| l > 1) {
            return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
        }
        Ok(Self { x, y, subjects, n_features })
    }

    /// Rows of a standard-scaled feature matrix.
    pub fn from_matrix(m: &FeatureMatrix) -> Result<Self> {
        if !m.scaled {
            return Err(Error::Unscaled);
        }
        Self::with_subjects(
            m.flat_features(),
            m.labels(),
            m.rows.iter().map(|r| r.subject).collect(),
            N_FEATURES,
        )
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn features(&self) -> &[f64] {
        &self.x
    }

    pub fn labels(&self) -> &[u8] {
        &self.y
    }

    pub fn subjects(&self) -> &[u32] {
        &self.subjects
    }

    /// Sorted distinct subject ids present in the rows.
    pub fn distinct_subjects(&self) -> Vec<u32> {
        let mut s = self.subjects.clone();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn select(&self, idx: &[usize]) -> Samples {
        Samples {
            x: idx.iter().flat_map(|&i| self.row(i).iter().copied()).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            subjects: idx.iter().map(|&i| self.subjects[i]).collect(),
            n_features: self.n_features,
        }
    }

    /// Returns a copy with labels replaced.
    pub fn with_labels(&self, y: Vec<u8>) -> Result<Samples> {
        Samples::with_subjects(self.x.clone(), y, self.subjects.clone(), self.n_features)
    }

    pub(crate) fn class_counts(&self) -> (usize, usize) {
        let pos = self.y.iter().filter(|&&l| l == 1).count();
        (self.y.len() - pos, pos)
    }

    fn check_trainable(&self) -> Result<()> {
        let (neg, pos) = self.class_counts();
        if neg == 0 || pos == 0 {
            return Err(Error::SingleClass);
        }
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("training features"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ModelState {
    GaussianNb(GaussianNb),
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
    GradientBoosting(GradientBoosting),
    Svm(Svm),
    Knn(Knn),
}

/// A fitted model. Immutable; scoring is a pure function of the state.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    params: HyperParams,
    state: ModelState,
    n_features: usize,
    train_row_count: usize,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn train_row_count(&self) -> usize {
        self.train_row_count
    }

    /// Score of one row. The caller guarantees `row.len() == n_features()`.
    #[inline]
    pub fn score_one(&self, row: &[f64]) -> f64 {
        match &self.state {
            ModelState::GaussianNb(m) => m.score(row),
            ModelState::DecisionTree(m) => m.score(row),
            ModelState::RandomForest(m) => m.score(row),
            ModelState::GradientBoosting(m) => m.score(row),
            ModelState::Svm(m) => m.score(row),
            ModelState::Knn(m) => m.score(row),
        }
    }

    /// Scores row-major features with `n_features` columns.
    pub fn score_rows(&self, x: &[f64], n_features: usize) -> Result<Vec<f64>> {
        if n_features != self.n_features || x.len() % n_features != 0 {
            return Err(Error::DimensionMismatch { expected: self.n_features, got: n_features });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scoring features"));
        }
        Ok(x.chunks_exact(n_features).map(|r| self.score_one(r)).collect())
    }

    pub fn score_samples(&self, s: &Samples) -> Result<Vec<f64>> {
        self.score_rows(s.features(), s.n_features())
    }

    pub fn as_gradient_boosting(&self) -> Option<&GradientBoosting> {
        match &self.state {
            ModelState::GradientBoosting(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_svm(&self) -> Option<&Svm> {
        match &self.state {
            ModelState::Svm(m) => Some(m),
            _ => None,
        }
    }
}

/// Fits `params` (which must be of `kind`) on `data`. All randomness is
/// driven by `seed`.
pub fn train(kind: ModelKind, params: &HyperParams, data: &Samples, seed: u64) -> Result<TrainedModel> {
    if params.kind() != kind {
        return Err(Error::InvalidParams(format!("{} parameters given for {kind}", params.kind())));
    }
    params.validate()?;
    data.check_trainable()?;
    let state = match *params {
        HyperParams::GaussianNb { var_smoothing } => ModelState::GaussianNb(GaussianNb::fit(data, var_smoothing)),
        HyperParams::DecisionTree { max_depth, min_samples_leaf } => {
            ModelState::DecisionTree(DecisionTree::fit(data, max_depth, min_samples_leaf))
        }
        HyperParams::RandomForest { n_trees, max_depth, min_samples_leaf, max_features, bootstrap } => {
            ModelState::RandomForest(RandomForest::fit(
                data,
                forest::ForestParams { n_trees, max_depth, min_samples_leaf, max_features, bootstrap },
                seed,
            ))
        }
        HyperParams::GradientBoosting { n_rounds, learning_rate, max_depth } => {
            ModelState::GradientBoosting(GradientBoosting::fit(data, n_rounds, learning_rate, max_depth))
        }
        HyperParams::Svm { c, kernel } => ModelState::Svm(Svm::fit(data, c, kernel, &svm::SolverOptions::default()).0),
        HyperParams::Knn { k } => ModelState::Knn(Knn::fit(data, k)),
    };
    Ok(TrainedModel { params: *params, state, n_features: data.n_features(), train_row_count: data.len() })
}

/// Scores a standard-scaled feature matrix.
pub fn score(model: &TrainedModel, rows: &FeatureMatrix) -> Result<Vec<f64>> {
    if !rows.scaled {
        return Err(Error::Unscaled);
    }
    model.score_rows(&rows.flat_features(), N_FEATURES)
}
