//! Random hyperparameter search scored by subject-wise cross-validation.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::{HyperParams, Kernel, MaxFeatures, ModelKind};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_fold, FoldAudit, PreparedFold, Stage, TrainOptions};
use crate::math;
use crate::seed;

/// Inclusive integer range, sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct IntRange {
    pub lo: usize,
    pub hi: usize,
}

/// Positive real range, sampled log-uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LogRange {
    pub lo: f64,
    pub hi: f64,
}

impl IntRange {
    pub const fn new(lo: usize, hi: usize) -> Self {
        Self { lo, hi }
    }

    fn check(&self, name: &str) -> Result<()> {
        if self.lo > self.hi {
            return Err(Error::EmptySearchSpace(format!("{name}: {} > {}", self.lo, self.hi)));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.gen_range(self.lo..=self.hi)
    }
}

impl LogRange {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn check(&self, name: &str) -> Result<()> {
        if !(self.lo > 0.0 && self.lo <= self.hi && self.hi.is_finite()) {
            return Err(Error::EmptySearchSpace(format!("{name}: [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let (a, b) = (math::ln(self.lo), math::ln(self.hi));
        math::exp(a + (b - a) * rng.gen::<f64>()).clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SvmKernelChoice {
    Rbf,
    Linear,
}

/// Bounds for every searched hyperparameter.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SearchSpace {
    pub nb_var_smoothing: LogRange,
    pub dt_max_depth: IntRange,
    pub dt_min_samples_leaf: IntRange,
    pub rf_trees: IntRange,
    pub rf_max_depth: IntRange,
    pub rf_min_samples_leaf: IntRange,
    pub gbm_rounds: IntRange,
    pub gbm_learning_rate: LogRange,
    pub gbm_max_depth: usize,
    pub svm_c: LogRange,
    pub svm_gamma: LogRange,
    pub svm_kernel: SvmKernelChoice,
    /// Only odd values inside the range are drawn.
    pub knn_k: IntRange,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            nb_var_smoothing: LogRange::new(1e-9, 1e-3),
            dt_max_depth: IntRange::new(2, 12),
            dt_min_samples_leaf: IntRange::new(1, 1),
            rf_trees: IntRange::new(50, 300),
            rf_max_depth: IntRange::new(2, 12),
            rf_min_samples_leaf: IntRange::new(1, 1),
            gbm_rounds: IntRange::new(50, 300),
            gbm_learning_rate: LogRange::new(0.01, 0.3),
            gbm_max_depth: 3,
            svm_c: LogRange::new(0.1, 100.0),
            svm_gamma: LogRange::new(0.01, 10.0),
            svm_kernel: SvmKernelChoice::Rbf,
            knn_k: IntRange::new(1, 51),
        }
    }
}

impl SearchSpace {
    pub fn validate(&self, kind: ModelKind) -> Result<()> {
        match kind {
            ModelKind::GaussianNb => self.nb_var_smoothing.check("nb_var_smoothing"),
            ModelKind::DecisionTree => {
                self.dt_max_depth.check("dt_max_depth")?;
                self.dt_min_samples_leaf.check("dt_min_samples_leaf")?;
                if self.dt_max_depth.lo == 0 || self.dt_min_samples_leaf.lo == 0 {
                    return Err(Error::EmptySearchSpace("decision tree bounds must be positive".into()));
                }
                Ok(())
            }
            ModelKind::RandomForest => {
                self.rf_trees.check("rf_trees")?;
                self.rf_max_depth.check("rf_max_depth")?;
                self.rf_min_samples_leaf.check("rf_min_samples_leaf")?;
                if self.rf_trees.lo == 0 || self.rf_max_depth.lo == 0 || self.rf_min_samples_leaf.lo == 0 {
                    return Err(Error::EmptySearchSpace("random forest bounds must be positive".into()));
                }
                Ok(())
            }
            ModelKind::GradientBoosting => {
                self.gbm_rounds.check("gbm_rounds")?;
                self.gbm_learning_rate.check("gbm_learning_rate")?;
                if self.gbm_learning_rate.hi > 1.0 || self.gbm_max_depth == 0 {
                    return Err(Error::EmptySearchSpace("gbm learning rate must be <= 1 and depth positive".into()));
                }
                Ok(())
            }
            ModelKind::Svm => {
                self.svm_c.check("svm_c")?;
                if self.svm_kernel == SvmKernelChoice::Rbf {
                    self.svm_gamma.check("svm_gamma")?;
                }
                Ok(())
            }
            ModelKind::Knn => {
                self.knn_k.check("knn_k")?;
                if self.odd_k_count() == 0 {
                    return Err(Error::EmptySearchSpace(format!(
                        "knn_k [{}, {}] holds no odd K",
                        self.knn_k.lo, self.knn_k.hi
                    )));
                }
                Ok(())
            }
        }
    }

    fn first_odd_k(&self) -> usize {
        let lo = self.knn_k.lo.max(1);
        if lo % 2 == 1 { lo } else { lo + 1 }
    }

    fn odd_k_count(&self) -> usize {
        let first = self.first_odd_k();
        if first > self.knn_k.hi {
            0
        } else {
            (self.knn_k.hi - first) / 2 + 1
        }
    }

    /// One draw for `kind`. Scale parameters are log-uniform, counts uniform.
    pub fn sample(&self, kind: ModelKind, rng: &mut ChaCha8Rng) -> Result<HyperParams> {
        self.validate(kind)?;
        Ok(match kind {
            ModelKind::GaussianNb => HyperParams::GaussianNb { var_smoothing: self.nb_var_smoothing.sample(rng) },
            ModelKind::DecisionTree => HyperParams::DecisionTree {
                max_depth: self.dt_max_depth.sample(rng),
                min_samples_leaf: self.dt_min_samples_leaf.sample(rng),
            },
            ModelKind::RandomForest => HyperParams::RandomForest {
                n_trees: self.rf_trees.sample(rng),
                max_depth: self.rf_max_depth.sample(rng),
                min_samples_leaf: self.rf_min_samples_leaf.sample(rng),
                max_features: MaxFeatures::Sqrt,
                bootstrap: true,
            },
            ModelKind::GradientBoosting => HyperParams::GradientBoosting {
                n_rounds: self.gbm_rounds.sample(rng),
                learning_rate: self.gbm_learning_rate.sample(rng),
                max_depth: self.gbm_max_depth,
            },
            ModelKind::Svm => {
                let c = self.svm_c.sample(rng);
                let kernel = match self.svm_kernel {
                    SvmKernelChoice::Rbf => Kernel::Rbf { gamma: self.svm_gamma.sample(rng) },
                    SvmKernelChoice::Linear => Kernel::Linear,
                };
                HyperParams::Svm { c, kernel }
            }
            ModelKind::Knn => {
                let idx = rng.gen_range(0..self.odd_k_count());
                HyperParams::Knn { k: self.first_odd_k() + 2 * idx }
            }
        })
    }
}

/// One evaluated draw.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Draw {
    pub params: HyperParams,
    /// `None` when no fold produced a defined AUC.
    pub mean_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: HyperParams,
    pub mean_auc: f64,
    /// AUC of the winning draw on each fold, in fold order.
    pub fold_aucs: Vec<Option<f64>>,
    /// Held-out scores of the winning draw on each fold, in fold order.
    pub fold_scores: Vec<Vec<f64>>,
    pub draws: Vec<Draw>,
}

/// Mean of the defined values.
pub(crate) fn mean_defined(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

/// Draws `budget` parameter sets for `kind`, scores each by its mean AUC
/// over `folds` and returns the best. Ties keep the earliest draw.
pub fn random_search(
    kind: ModelKind,
    space: &SearchSpace,
    folds: &[PreparedFold],
    budget: usize,
    seed: u64,
    options: &TrainOptions,
    audit: &dyn FoldAudit,
) -> Result<SearchOutcome> {
    if budget == 0 {
        return Err(Error::InvalidArgument("search budget must be at least 1".into()));
    }
    if folds.is_empty() {
        return Err(Error::Empty("no folds to search over"));
    }
    space.validate(kind)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, &[0x5EA2C4]));
    let mut draws = Vec::with_capacity(budget);
    let mut best: Option<(usize, f64, Vec<Option<f64>>, Vec<Vec<f64>>)> = None;

    for d in 0..budget {
        let params = space.sample(kind, &mut rng)?;
        let mut aucs = Vec::with_capacity(folds.len());
        let mut scores = Vec::with_capacity(folds.len());
        for (f, fold) in folds.iter().enumerate() {
            let train_seed = seed::derive(seed, &[d as u64, f as u64]);
            let result = evaluate_fold(&params, fold, train_seed, options, audit, Stage::SearchTrain)?;
            aucs.push(result.auc);
            scores.push(result.scores);
        }
        let mean = mean_defined(&aucs);
        draws.push(Draw { params, mean_auc: mean });
        if let Some(m) = mean {
            if best.as_ref().is_none_or(|b| m > b.1) {
                best = Some((d, m, aucs, scores));
            }
        }
    }

    let (idx, mean_auc, fold_aucs, fold_scores) = best.ok_or(Error::NoEvaluableFolds)?;
    Ok(SearchOutcome { best: draws[idx].params, mean_auc, fold_aucs, fold_scores, draws })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_stay_in_bounds() {
        let space = SearchSpace::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            for kind in ModelKind::ALL {
                let p = space.sample(kind, &mut rng).unwrap();
                p.validate().unwrap();
                match p {
                    HyperParams::GaussianNb { var_smoothing } => assert!((1e-9..=1e-3).contains(&var_smoothing)),
                    HyperParams::DecisionTree { max_depth, .. } => assert!((2..=12).contains(&max_depth)),
                    HyperParams::RandomForest { n_trees, .. } => assert!((50..=300).contains(&n_trees)),
                    HyperParams::GradientBoosting { n_rounds, learning_rate, max_depth } => {
                        assert!((50..=300).contains(&n_rounds));
                        assert!((0.01..=0.3).contains(&learning_rate));
                        assert_eq!(max_depth, 3);
                    }
                    HyperParams::Svm { c, kernel: Kernel::Rbf { gamma } } => {
                        assert!((0.1..=100.0).contains(&c));
                        assert!((0.01..=10.0).contains(&gamma));
                    }
                    HyperParams::Svm { .. } => panic!("default kernel is RBF"),
                    HyperParams::Knn { k } => assert!(k % 2 == 1 && (1..=51).contains(&k)),
                }
            }
        }
    }

    #[test]
    fn log_uniform_covers_decades() {
        let r = LogRange::new(0.1, 100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let below_one = (0..3000).filter(|_| r.sample(&mut rng) < 1.0).count();
        // one of three decades lies below 1
        assert!((800..1200).contains(&below_one), "{below_one}");
    }

    #[test]
    fn empty_spaces_rejected() {
        let mut s = SearchSpace::default();
        s.knn_k = IntRange::new(2, 2);
        assert!(matches!(s.validate(ModelKind::Knn), Err(Error::EmptySearchSpace(_))));
        let mut s = SearchSpace::default();
        s.svm_c = LogRange::new(10.0, 1.0);
        assert!(s.validate(ModelKind::Svm).is_err());
        let mut s = SearchSpace::default();
        s.dt_max_depth = IntRange::new(5, 4);
        assert!(s.validate(ModelKind::DecisionTree).is_err());
        let mut s = SearchSpace::default();
        s.nb_var_smoothing = LogRange::new(0.0, 1.0);
        assert!(s.validate(ModelKind::GaussianNb).is_err());
    }

    #[test]
    fn odd_k_enumeration() {
        let mut s = SearchSpace::default();
        s.knn_k = IntRange::new(4, 9);
        assert_eq!(s.first_odd_k(), 5);
        assert_eq!(s.odd_k_count(), 3);
        s.knn_k = IntRange::new(0, 1);
        assert_eq!(s.odd_k_count(), 1);
    }

    #[test]
    fn linear_kernel_choice() {
        let s = SearchSpace { svm_kernel: SvmKernelChoice::Linear, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(s.sample(ModelKind::Svm, &mut rng).unwrap(), HyperParams::Svm { kernel: Kernel::Linear, .. }));
    }

    #[test]
    fn mean_of_defined_values() {
        assert_eq!(mean_defined(&[Some(1.0), None, Some(0.5)]), Some(0.75));
        assert_eq!(mean_defined(&[None]), None);
    }
}
