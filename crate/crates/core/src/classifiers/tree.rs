//! CART trees.
//!
//! One split search serves both classification and boosting: for 0/1
//! targets the weighted Gini impurity of a node equals twice its
//! within-node sum of squares, so minimizing squared error picks the same
//! split as Gini.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::Samples;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: u32, right: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tree {
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features tried per split; `None` tries all in index order.
    pub max_features: Option<usize>,
}

impl Tree {
    #[inline]
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature] <= threshold { left as usize } else { right as usize };
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left as usize).max(go(nodes, right as usize)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Grows a tree on `targets` over the rows in `indices` (duplicates
    /// allowed, as produced by bootstrapping). `leaf_value` turns the row
    /// indices reaching a leaf into that leaf's output.
    pub fn grow(
        data: &Samples,
        targets: &[f64],
        indices: Vec<usize>,
        params: TreeParams,
        mut rng: Option<&mut ChaCha8Rng>,
        leaf_value: &mut dyn FnMut(&[usize]) -> f64,
    ) -> Tree {
        let mut nodes = Vec::new();
        let mut builder = Builder { data, targets, params, pairs: Vec::new(), features: Vec::new() };
        builder.build(&mut nodes, indices, 0, &mut rng, leaf_value);
        Tree { nodes }
    }
}

struct Builder<'a> {
    data: &'a Samples,
    targets: &'a [f64],
    params: TreeParams,
    pairs: Vec<(f64, f64)>,
    features: Vec<usize>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn build(
        &mut self,
        nodes: &mut Vec<Node>,
        indices: Vec<usize>,
        depth: usize,
        rng: &mut Option<&mut ChaCha8Rng>,
        leaf_value: &mut dyn FnMut(&[usize]) -> f64,
    ) -> u32 {
        let id = nodes.len() as u32;
        let split = if depth < self.params.max_depth && indices.len() >= 2 * self.params.min_samples_leaf {
            self.best_split(&indices, rng)
        } else {
            None
        };
        let Some(split) = split else {
            nodes.push(Node::Leaf { value: leaf_value(&indices) });
            return id;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .iter()
            .partition(|&&i| self.data.row(i)[split.feature] <= split.threshold);
        drop(indices);
        nodes.push(Node::Leaf { value: 0.0 });
        let left = self.build(nodes, left_idx, depth + 1, rng, leaf_value);
        let right = self.build(nodes, right_idx, depth + 1, rng, leaf_value);
        nodes[id as usize] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        id
    }

    fn candidate_features(&mut self, rng: &mut Option<&mut ChaCha8Rng>) {
        let d = self.data.n_features();
        self.features.clear();
        self.features.extend(0..d);
        if let (Some(k), Some(rng)) = (self.params.max_features, rng.as_deref_mut()) {
            if k < d {
                for i in 0..k {
                    let j = rng.gen_range(i..d);
                    self.features.swap(i, j);
                }
                self.features.truncate(k);
                self.features.sort_unstable();
            }
        }
    }

    /// Maximizes `S_L^2 / n_L + S_R^2 / n_R`, equivalent to minimizing the
    /// children's summed squared error. Only strict improvements over the
    /// parent split a node; earlier features and thresholds win ties.
    fn best_split(&mut self, indices: &[usize], rng: &mut Option<&mut ChaCha8Rng>) -> Option<BestSplit> {
        let n = indices.len();
        let total: f64 = indices.iter().map(|&i| self.targets[i]).sum();
        let parent = total * total / n as f64;
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<BestSplit> = None;

        self.candidate_features(rng);
        let features = core::mem::take(&mut self.features);
        for &f in &features {
            self.pairs.clear();
            self.pairs.extend(indices.iter().map(|&i| (self.data.row(i)[f], self.targets[i])));
            self.pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            let mut left_sum = 0.0;
            for pos in 0..n - 1 {
                left_sum += self.pairs[pos].1;
                let n_left = pos + 1;
                if n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let (a, b) = (self.pairs[pos].0, self.pairs[pos + 1].0);
                if a == b {
                    continue;
                }
                let right_sum = total - left_sum;
                let score = left_sum * left_sum / n_left as f64 + right_sum * right_sum / (n - n_left) as f64;
                let improves = score > parent + 1e-12 * parent.abs().max(1.0);
                if improves && best.as_ref().is_none_or(|bs| score > bs.score) {
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some(BestSplit { feature: f, threshold, score });
                }
            }
        }
        self.features = features;
        best
    }
}

pub(crate) fn mean_target(targets: &[f64]) -> impl FnMut(&[usize]) -> f64 + '_ {
    move |idx: &[usize]| {
        if idx.is_empty() {
            0.0
        } else {
            idx.iter().map(|&i| targets[i]).sum::<f64>() / idx.len() as f64
        }
    }
}

/// CART classifier; scores are the class-1 fraction of the reached leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    tree: Tree,
}

impl DecisionTree {
    pub(crate) fn fit(data: &Samples, max_depth: usize, min_samples_leaf: usize) -> Self {
        let targets: Vec<f64> = data.labels().iter().map(|&l| f64::from(l)).collect();
        let params = TreeParams { max_depth, min_samples_leaf, max_features: None };
        let tree = Tree::grow(data, &targets, (0..data.len()).collect(), params, None, &mut mean_target(&targets));
        Self { tree }
    }

    #[inline]
    pub(crate) fn score(&self, row: &[f64]) -> f64 {
        self.tree.predict(row)
    }

    pub fn depth(&self) -> usize {
        self.tree.depth()
    }

    pub fn node_count(&self) -> usize {
        self.tree.node_count()
    }

    #[cfg(test)]
    pub(crate) fn tree(&self) -> &Tree {
        &self.tree
    }
}
