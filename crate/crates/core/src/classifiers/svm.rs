//! C-support vector classification trained by sequential minimal
//! optimization with second-order working-set selection.
//!
//! The solver minimizes `f(a) = 1/2 a'Qa - e'a` subject to `0 <= a_i <= C`
//! and `y'a = 0`, where `Q_ij = y_i y_j K(x_i, x_j)`. Each step optimizes
//! the pair `(i, j)` exactly, so the dual objective `-f(a)` never
//! decreases. Iteration stops once the maximal KKT violation
//! `m(a) - M(a)` drops below `tolerance`.

use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::Samples;
use crate::math;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum Kernel {
    Rbf { gamma: f64 },
    Linear,
}

impl Kernel {
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                math::exp(-gamma * d2)
            }
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Stopping tolerance on the maximal KKT violation.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Memory budget for cached kernel rows.
    pub cache_bytes: usize,
    /// Record the dual objective after every iteration.
    pub trace_objective: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: 1e-3, max_iterations: 10_000_000, cache_bytes: 256 << 20, trace_objective: false }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolverStats {
    pub iterations: usize,
    pub converged: bool,
    /// Dual objective `e'a - 1/2 a'Qa`, when traced: initial value first.
    pub objective_trace: Vec<f64>,
    pub alpha: Vec<f64>,
    pub final_violation: f64,
}

/// LRU cache of rows of Q.
struct RowCache<'a> {
    data: &'a Samples,
    y: &'a [f64],
    kernel: Kernel,
    rows: Vec<Option<Rc<[f64]>>>,
    last_used: Vec<u64>,
    cached: usize,
    capacity: usize,
    clock: u64,
}

impl<'a> RowCache<'a> {
    fn new(data: &'a Samples, y: &'a [f64], kernel: Kernel, cache_bytes: usize) -> Self {
        let n = data.len();
        let capacity = (cache_bytes / (n.max(1) * core::mem::size_of::<f64>())).max(2);
        Self { data, y, kernel, rows: vec![None; n], last_used: vec![0; n], cached: 0, capacity, clock: 0 }
    }

    fn row(&mut self, i: usize) -> Rc<[f64]> {
        self.clock += 1;
        self.last_used[i] = self.clock;
        if let Some(r) = &self.rows[i] {
            return r.clone();
        }
        if self.cached >= self.capacity {
            let victim = (0..self.rows.len())
                .filter(|&k| self.rows[k].is_some() && k != i)
                .min_by_key(|&k| self.last_used[k]);
            if let Some(v) = victim {
                self.rows[v] = None;
                self.cached -= 1;
            }
        }
        let xi = self.data.row(i);
        let yi = self.y[i];
        let row: Rc<[f64]> = (0..self.data.len())
            .map(|k| yi * self.y[k] * self.kernel.eval(xi, self.data.row(k)))
            .collect();
        self.rows[i] = Some(row.clone());
        self.cached += 1;
        row
    }
}

struct Solver<'a> {
    y: &'a [f64],
    c: f64,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    qd: Vec<f64>,
    cache: RowCache<'a>,
}

impl Solver<'_> {
    #[inline]
    fn is_upper(&self, t: usize) -> bool {
        self.alpha[t] >= self.c
    }

    #[inline]
    fn is_lower(&self, t: usize) -> bool {
        self.alpha[t] <= 0.0
    }

    fn dual_objective(&self) -> f64 {
        // f(a) = 1/2 sum a_i (G_i + p_i) with p = -e
        let primal_form: f64 = self.alpha.iter().zip(&self.grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>() / 2.0;
        -primal_form
    }

    /// Returns the working pair, or `None` once the violation is below
    /// tolerance. Also reports the current violation.
    fn select(&mut self, tolerance: f64) -> (Option<(usize, usize)>, f64) {
        let n = self.alpha.len();
        let mut gmax = f64::NEG_INFINITY;
        let mut gmax_idx = None;
        for t in 0..n {
            if self.y[t] > 0.0 {
                if !self.is_upper(t) && -self.grad[t] >= gmax {
                    gmax = -self.grad[t];
                    gmax_idx = Some(t);
                }
            } else if !self.is_lower(t) && self.grad[t] >= gmax {
                gmax = self.grad[t];
                gmax_idx = Some(t);
            }
        }
        let Some(i) = gmax_idx else { return (None, 0.0) };
        let qi = self.cache.row(i);

        let mut gmax2 = f64::NEG_INFINITY;
        let mut best_j = None;
        let mut obj_min = f64::INFINITY;
        for t in 0..n {
            let (grad_diff, quad) = if self.y[t] > 0.0 {
                if self.is_lower(t) {
                    continue;
                }
                gmax2 = gmax2.max(self.grad[t]);
                (gmax + self.grad[t], self.qd[i] + self.qd[t] - 2.0 * self.y[i] * qi[t])
            } else {
                if self.is_upper(t) {
                    continue;
                }
                gmax2 = gmax2.max(-self.grad[t]);
                (gmax - self.grad[t], self.qd[i] + self.qd[t] + 2.0 * self.y[i] * qi[t])
            };
            if grad_diff > 0.0 {
                let q = if quad > 0.0 { quad } else { TAU };
                let obj = -(grad_diff * grad_diff) / q;
                if obj <= obj_min {
                    obj_min = obj;
                    best_j = Some(t);
                }
            }
        }
        let violation = gmax + gmax2;
        match best_j {
            Some(j) if violation >= tolerance => (Some((i, j)), violation),
            _ => (None, violation),
        }
    }

    fn update(&mut self, i: usize, j: usize) {
        let qi = self.cache.row(i);
        let qj = self.cache.row(j);
        let c = self.c;
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if self.y[i] != self.y[j] {
            let quad = {
                let q = self.qd[i] + self.qd[j] + 2.0 * qi[j];
                if q > 0.0 { q } else { TAU }
            };
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = {
                let q = self.qd[i] + self.qd[j] - 2.0 * qi[j];
                if q > 0.0 { q } else { TAU }
            };
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for (k, g) in self.grad.iter_mut().enumerate() {
            *g += qi[k] * di + qj[k] * dj;
        }
    }

    /// Offset from the free support vectors, or the midpoint of the
    /// feasible interval when none is free.
    fn rho(&self) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut n_free, mut sum_free) = (0usize, 0.0);
        for t in 0..self.alpha.len() {
            let yg = self.y[t] * self.grad[t];
            if self.is_upper(t) {
                if self.y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if self.is_lower(t) {
                if self.y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                sum_free += yg;
            }
        }
        if n_free > 0 {
            sum_free / n_free as f64
        } else {
            (ub + lb) / 2.0
        }
    }
}

/// Trained SVM; the score is the signed decision value
/// `sum_i a_i y_i K(x_i, x) - rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct Svm {
    kernel: Kernel,
    support: Vec<f64>,
    coef: Vec<f64>,
    n_features: usize,
    rho: f64,
}

impl Svm {
    pub fn fit(data: &Samples, c: f64, kernel: Kernel, options: &SolverOptions) -> (Self, SolverStats) {
        let n = data.len();
        let y: Vec<f64> = data.labels().iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let qd: Vec<f64> = (0..n).map(|i| kernel.eval(data.row(i), data.row(i))).collect();
        let mut solver = Solver {
            y: &y,
            c,
            alpha: vec![0.0; n],
            grad: vec![-1.0; n],
            qd,
            cache: RowCache::new(data, &y, kernel, options.cache_bytes),
        };
        let mut stats = SolverStats::default();
        if options.trace_objective {
            stats.objective_trace.push(solver.dual_objective());
        }
        loop {
            let (pair, violation) = solver.select(options.tolerance);
            stats.final_violation = violation;
            let Some((i, j)) = pair else {
                stats.converged = true;
                break;
            };
            if stats.iterations >= options.max_iterations {
                break;
            }
            solver.update(i, j);
            stats.iterations += 1;
            if options.trace_objective {
                stats.objective_trace.push(solver.dual_objective());
            }
        }
        let rho = solver.rho();
        let d = data.n_features();
        let mut support = Vec::new();
        let mut coef = Vec::new();
        for (i, &a) in solver.alpha.iter().enumerate() {
            if a > 0.0 {
                support.extend_from_slice(data.row(i));
                coef.push(a * y[i]);
            }
        }
        stats.alpha = solver.alpha;
        (Self { kernel, support, coef, n_features: d, rho }, stats)
    }

    #[inline]
    pub(crate) fn score(&self, row: &[f64]) -> f64 {
        self.support
            .chunks_exact(self.n_features)
            .zip(&self.coef)
            .map(|(sv, c)| c * self.kernel.eval(sv, row))
            .sum::<f64>()
            - self.rho
    }

    pub fn decision_value(&self, row: &[f64]) -> f64 {
        self.score(row)
    }

    pub fn n_support(&self) -> usize {
        self.coef.len()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blobs(n: usize, overlap: f64, seed: u64) -> Samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = (i % 2) as u8;
            let centre = if label == 1 { 1.0 } else { -1.0 };
            x.push(centre + overlap * rng.gen_range(-1.0..1.0));
            x.push(rng.gen_range(-1.0..1.0));
            y.push(label);
        }
        Samples::new(x, y, 2).unwrap()
    }

    fn check_kkt(data: &Samples, model: &Svm, alpha: &[f64], c: f64, tol: f64) {
        for i in 0..data.len() {
            let yi = if data.labels()[i] == 1 { 1.0 } else { -1.0 };
            let margin = yi * model.score(data.row(i));
            if alpha[i] <= 0.0 {
                assert!(margin >= 1.0 - tol, "a=0 but y f = {margin}");
            } else if alpha[i] >= c {
                assert!(margin <= 1.0 + tol, "a=C but y f = {margin}");
            } else {
                assert!((margin - 1.0).abs() <= tol, "free SV with y f = {margin}");
            }
        }
    }

    #[test]
    fn dual_objective_non_decreasing_and_kkt() {
        for (kernel, c, overlap) in [
            (Kernel::Rbf { gamma: 0.5 }, 1.0, 2.5),
            (Kernel::Rbf { gamma: 5.0 }, 10.0, 1.5),
            (Kernel::Linear, 0.5, 2.0),
        ] {
            let data = blobs(120, overlap, 3);
            let opts = SolverOptions { trace_objective: true, ..Default::default() };
            let (model, stats) = Svm::fit(&data, c, kernel, &opts);
            assert!(stats.converged);
            for w in stats.objective_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "objective fell {} -> {}", w[0], w[1]);
            }
            let sum: f64 = stats
                .alpha
                .iter()
                .zip(data.labels())
                .map(|(a, &l)| if l == 1 { *a } else { -*a })
                .sum();
            assert!(sum.abs() < 1e-9);
            check_kkt(&data, &model, &stats.alpha, c, 1e-3);
        }
    }

    #[test]
    fn separable_margin() {
        let data = Samples::new(vec![-2.0, -1.0, 1.0, 2.0], vec![0, 0, 1, 1], 1).unwrap();
        let (m, stats) = Svm::fit(&data, 100.0, Kernel::Linear, &SolverOptions::default());
        assert!(stats.converged);
        // hard-margin solution: w = 1, b = 0
        assert!((m.decision_value(&[1.0]) - 1.0).abs() < 1e-3);
        assert!((m.decision_value(&[-1.0]) + 1.0).abs() < 1e-3);
        assert_eq!(m.n_support(), 2);
    }

    #[test]
    fn tiny_cache_gives_same_model() {
        let data = blobs(60, 2.0, 9);
        let kernel = Kernel::Rbf { gamma: 1.0 };
        let (a, _) = Svm::fit(&data, 1.0, kernel, &SolverOptions::default());
        let (b, _) = Svm::fit(&data, 1.0, kernel, &SolverOptions { cache_bytes: 0, ..Default::default() });
        assert_eq!(a, b);
    }
}
