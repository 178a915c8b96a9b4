use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Fold {
    pub train: Vec<u32>,
    pub test: u32,
}

/// Leave-one-subject-out folds.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SubjectFolds {
    pub k: usize,
    pub folds: Vec<Fold>,
}

impl SubjectFolds {
    pub fn subjects(&self) -> Vec<u32> {
        self.folds.iter().map(|f| f.test).collect()
    }
}

/// One fold per subject, in ascending subject order; each fold trains on
/// every other subject.
pub fn make_folds(subject_ids: &[u32]) -> Result<SubjectFolds> {
    let mut ids = subject_ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() < 2 {
        return Err(Error::TooFewSubjects(ids.len()));
    }
    let folds: Vec<Fold> = ids
        .iter()
        .map(|&test| Fold { train: ids.iter().copied().filter(|&s| s != test).collect(), test })
        .collect();
    debug_assert!(folds.iter().all(|f| !f.train.contains(&f.test)));
    Ok(SubjectFolds { k: folds.len(), folds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn two_subjects() {
        let f = make_folds(&[2, 1]).unwrap();
        assert_eq!(f.k, 2);
        assert_eq!(f.folds, vec![Fold { train: vec![2], test: 1 }, Fold { train: vec![1], test: 2 }]);
    }

    #[test]
    fn nine_retained_subjects() {
        let ids = [1, 2, 3, 4, 6, 7, 9, 10, 11];
        let f = make_folds(&ids).unwrap();
        assert_eq!(f.k, 9);
        for fold in &f.folds {
            assert_eq!(fold.train.len(), 8);
            assert!(!fold.train.contains(&fold.test));
        }
        assert_eq!(f.subjects(), ids.to_vec());
    }

    #[test]
    fn too_few() {
        assert_eq!(make_folds(&[3]), Err(Error::TooFewSubjects(1)));
        assert_eq!(make_folds(&[3, 3]), Err(Error::TooFewSubjects(1)));
    }
}
