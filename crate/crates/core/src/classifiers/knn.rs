use alloc::vec::Vec;

use super::Samples;

/// Brute-force Euclidean K-nearest-neighbours; the score is the fraction
/// of the K neighbours labelled 1. Distance ties go to the lower training
/// index.
#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    k: usize,
    train: Samples,
}

impl Knn {
    pub(crate) fn fit(data: &Samples, k: usize) -> Self {
        Self { k: k.min(data.len()), train: data.clone() }
    }

    pub(crate) fn score(&self, row: &[f64]) -> f64 {
        let mut dist: Vec<(f64, usize)> = (0..self.train.len())
            .map(|i| {
                let d2 = self.train.row(i).iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                (d2, i)
            })
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        let k = self.k;
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, cmp);
        }
        let votes = dist[..k].iter().filter(|&&(_, i)| self.train.labels()[i] == 1).count();
        votes as f64 / k as f64
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn one_neighbour_recovers_training_labels() {
        let x = vec![0.0, 0.0, 1.0, 0.5, 2.0, 2.0, -1.0, 3.0];
        let y = vec![1, 0, 0, 1];
        let data = Samples::new(x, y.clone(), 2).unwrap();
        let m = Knn::fit(&data, 1);
        for i in 0..data.len() {
            assert_eq!(m.score(data.row(i)), f64::from(y[i]));
        }
    }

    #[test]
    fn vote_fraction() {
        let data = Samples::new(vec![0.0, 1.0, 2.0, 10.0, 11.0], vec![1, 1, 0, 0, 0], 1).unwrap();
        assert!((Knn::fit(&data, 3).score(&[0.5]) - 2.0 / 3.0).abs() < 1e-15);
        // K beyond the training size is clamped
        let m = Knn::fit(&data, 51);
        assert_eq!(m.k(), 5);
        assert!((m.score(&[0.0]) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn ties_prefer_lower_index() {
        // both at distance 1 from the query
        let data = Samples::new(vec![-1.0, 1.0], vec![0, 1], 1).unwrap();
        assert_eq!(Knn::fit(&data, 1).score(&[0.0]), 0.0);
    }
}
