use alloc::vec;
use alloc::vec::Vec;

use super::Samples;
use crate::math;

/// Absolute floor on per-class variances, reached only when every feature
/// is constant.
const VAR_FLOOR: f64 = 1e-12;

/// Gaussian naive Bayes. `var_smoothing` adds that fraction of the largest
/// feature variance to every per-class variance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    log_prior: [f64; 2],
    mean: [Vec<f64>; 2],
    var: [Vec<f64>; 2],
}

impl GaussianNb {
    pub(crate) fn fit(data: &Samples, var_smoothing: f64) -> Self {
        let d = data.n_features();
        let n = data.len() as f64;
        let mut count = [0usize; 2];
        let mut mean = [vec![0.0; d], vec![0.0; d]];
        for i in 0..data.len() {
            let c = data.labels()[i] as usize;
            count[c] += 1;
            for (m, v) in mean[c].iter_mut().zip(data.row(i)) {
                *m += v;
            }
        }
        for c in 0..2 {
            mean[c].iter_mut().for_each(|m| *m /= count[c] as f64);
        }
        let mut var = [vec![0.0; d], vec![0.0; d]];
        for i in 0..data.len() {
            let c = data.labels()[i] as usize;
            for (j, v) in data.row(i).iter().enumerate() {
                let dv = v - mean[c][j];
                var[c][j] += dv * dv;
            }
        }

        let max_var = (0..d)
            .map(|j| {
                let mu = (0..data.len()).map(|i| data.row(i)[j]).sum::<f64>() / n;
                (0..data.len()).map(|i| { let d = data.row(i)[j] - mu; d * d }).sum::<f64>() / n
            })
            .fold(0.0_f64, f64::max);
        let epsilon = var_smoothing * max_var;
        for c in 0..2 {
            var[c].iter_mut().for_each(|v| *v = (*v / count[c] as f64 + epsilon).max(VAR_FLOOR));
        }
        let log_prior = [math::ln(count[0] as f64 / n), math::ln(count[1] as f64 / n)];
        Self { log_prior, mean, var }
    }

    fn log_joint(&self, c: usize, row: &[f64]) -> f64 {
        let two_pi = 2.0 * core::f64::consts::PI;
        self.log_prior[c]
            + row
                .iter()
                .zip(self.mean[c].iter().zip(&self.var[c]))
                .map(|(x, (m, v))| -0.5 * math::ln(two_pi * v) - (x - m) * (x - m) / (2.0 * v))
                .sum::<f64>()
    }

    /// Posterior P(label = 1 | row).
    #[inline]
    pub(crate) fn score(&self, row: &[f64]) -> f64 {
        math::sigmoid(self.log_joint(1, row) - self.log_joint(0, row))
    }
}
