use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::{mean_target, Tree, TreeParams};
use super::{MaxFeatures, Samples};
use crate::seed;

#[derive(Debug, Clone, Copy)]
pub(crate) struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
}

/// Bagged CART trees with per-split feature subsampling. Scores are the
/// mean class-1 leaf fraction over trees.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<Tree>,
}

impl RandomForest {
    pub(crate) fn fit(data: &Samples, p: ForestParams, seed: u64) -> Self {
        let targets: Vec<f64> = data.labels().iter().map(|&l| f64::from(l)).collect();
        let n = data.len();
        let max_features = match p.max_features {
            MaxFeatures::All => None,
            mf => Some(mf.count(data.n_features())),
        };
        let params = TreeParams { max_depth: p.max_depth, min_samples_leaf: p.min_samples_leaf, max_features };
        let trees = (0..p.n_trees)
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, &[t as u64]));
                let indices: Vec<usize> = if p.bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                Tree::grow(data, &targets, indices, params, Some(&mut rng), &mut mean_target(&targets))
            })
            .collect();
        Self { trees }
    }

    #[inline]
    pub(crate) fn score(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::DecisionTree;

    fn noisy_data() -> Samples {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 120;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            let c: f64 = rng.gen_range(-1.0..1.0);
            x.extend([a, b, c]);
            y.push(u8::from(a + 0.5 * b + 0.3 * rng.gen_range(-1.0..1.0) > 0.0));
        }
        Samples::new(x, y, 3).unwrap()
    }

    #[test]
    fn single_unbagged_tree_equals_decision_tree() {
        let data = noisy_data();
        for depth in [1, 3, 6] {
            let p = ForestParams { n_trees: 1, max_depth: depth, min_samples_leaf: 2, max_features: MaxFeatures::All, bootstrap: false };
            let rf = RandomForest::fit(&data, p, 99);
            let dt = DecisionTree::fit(&data, depth, 2);
            assert_eq!(&rf.trees[0], dt.tree());
            for i in 0..data.len() {
                assert_eq!(rf.score(data.row(i)), dt.score(data.row(i)));
            }
        }
    }

    #[test]
    fn seeded_forest_is_reproducible() {
        let data = noisy_data();
        let p = ForestParams { n_trees: 8, max_depth: 4, min_samples_leaf: 1, max_features: MaxFeatures::Sqrt, bootstrap: true };
        let a = RandomForest::fit(&data, p, 5);
        let b = RandomForest::fit(&data, p, 5);
        assert_eq!(a, b);
        let c = RandomForest::fit(&data, p, 6);
        assert_ne!(a, c);
        assert_eq!(a.n_trees(), 8);
    }

    #[test]
    fn scores_are_fractions() {
        let data = noisy_data();
        let p = ForestParams { n_trees: 5, max_depth: 3, min_samples_leaf: 1, max_features: MaxFeatures::Sqrt, bootstrap: true };
        let rf = RandomForest::fit(&data, p, 1);
        for i in 0..data.len() {
            let s = rf.score(data.row(i));
            assert!((0.0..=1.0).contains(&s));
        }
    }
}
