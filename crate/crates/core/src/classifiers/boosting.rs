//! Gradient-boosted regression trees on the logistic loss.

use alloc::vec;
use alloc::vec::Vec;

use super::tree::{Tree, TreeParams};
use super::Samples;
use crate::math;

const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct GradientBoosting {
    init: f64,
    trees: Vec<Tree>,
    /// Mean training log-loss before the first round and after each round.
    train_loss: Vec<f64>,
}

/// Logistic loss of a row with label `y` at raw score `f`.
#[inline]
fn row_loss(y: u8, f: f64) -> f64 {
    if y == 1 {
        math::softplus(-f)
    } else {
        math::softplus(f)
    }
}

impl GradientBoosting {
    /// Each round fits a depth-limited tree to the negative gradient
    /// `y - p`, then sets every leaf to a damped Newton step
    /// `lr * sum(y - p) / sum(p (1 - p))`. A step that would raise the
    /// leaf's own loss is halved until it does not, so the training loss
    /// never increases from one round to the next.
    pub(crate) fn fit(data: &Samples, n_rounds: usize, learning_rate: f64, max_depth: usize) -> Self {
        let n = data.len();
        let labels = data.labels();
        let (neg, pos) = data.class_counts();
        let init = math::ln(pos as f64 / neg as f64);
        let mut raw = vec![init; n];
        let mean_loss = |raw: &[f64]| labels.iter().zip(raw).map(|(&y, &f)| row_loss(y, f)).sum::<f64>() / n as f64;
        let mut train_loss = Vec::with_capacity(n_rounds + 1);
        train_loss.push(mean_loss(&raw));

        let params = TreeParams { max_depth, min_samples_leaf: 1, max_features: None };
        let mut trees = Vec::with_capacity(n_rounds);
        for _ in 0..n_rounds {
            let prob: Vec<f64> = raw.iter().map(|&f| math::sigmoid(f)).collect();
            let residual: Vec<f64> = labels.iter().zip(&prob).map(|(&y, &p)| f64::from(y) - p).collect();
            let mut leaf = |idx: &[usize]| newton_leaf(idx, labels, &raw, &prob, &residual, learning_rate);
            let tree = Tree::grow(data, &residual, (0..n).collect(), params, None, &mut leaf);
            for (i, f) in raw.iter_mut().enumerate() {
                *f += tree.predict(data.row(i));
            }
            train_loss.push(mean_loss(&raw));
            trees.push(tree);
        }
        Self { init, trees, train_loss }
    }

    fn raw_score(&self, row: &[f64]) -> f64 {
        self.trees.iter().fold(self.init, |acc, t| acc + t.predict(row))
    }

    #[inline]
    pub(crate) fn score(&self, row: &[f64]) -> f64 {
        math::sigmoid(self.raw_score(row))
    }

    pub fn train_loss_trace(&self) -> &[f64] {
        &self.train_loss
    }

    pub fn n_rounds(&self) -> usize {
        self.trees.len()
    }
}

fn newton_leaf(idx: &[usize], labels: &[u8], raw: &[f64], prob: &[f64], residual: &[f64], lr: f64) -> f64 {
    let grad: f64 = idx.iter().map(|&i| residual[i]).sum();
    let hess: f64 = idx.iter().map(|&i| prob[i] * (1.0 - prob[i])).sum();
    if grad == 0.0 || hess <= 0.0 {
        return 0.0;
    }
    let leaf_loss = |delta: f64| idx.iter().map(|&i| row_loss(labels[i], raw[i] + delta)).sum::<f64>();
    let base = leaf_loss(0.0);
    let mut step = lr * grad / hess;
    for _ in 0..MAX_HALVINGS {
        if step.is_finite() && leaf_loss(step) <= base {
            return step;
        }
        step /= 2.0;
    }
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn data(seed: u64) -> Samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..200 {
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b: f64 = rng.gen_range(-2.0..2.0);
            x.extend([a, b]);
            y.push(u8::from(a * a + b > 1.0 + rng.gen_range(-0.5..0.5)));
        }
        Samples::new(x, y, 2).unwrap()
    }

    #[test]
    fn zero_rounds_is_constant() {
        let d = data(1);
        let m = GradientBoosting::fit(&d, 0, 0.1, 3);
        let s0 = m.score(d.row(0));
        for i in 0..d.len() {
            assert_eq!(m.score(d.row(i)), s0);
        }
        let (neg, pos) = d.class_counts();
        assert!((s0 - pos as f64 / (neg + pos) as f64).abs() < 1e-12);
    }

    #[test]
    fn training_loss_never_increases() {
        for (seed, lr) in [(1, 0.3), (2, 0.01), (3, 1.0)] {
            let m = GradientBoosting::fit(&data(seed), 60, lr, 3);
            let trace = m.train_loss_trace();
            assert_eq!(trace.len(), 61);
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
            }
            assert!(trace[60] < trace[0]);
        }
    }

    #[test]
    fn leaf_step_zero_when_gradient_vanishes() {
        assert_eq!(newton_leaf(&[0, 1], &[0, 1], &[0.0, 0.0], &[0.5, 0.5], &[-0.5, 0.5], 0.1), 0.0);
    }
}
