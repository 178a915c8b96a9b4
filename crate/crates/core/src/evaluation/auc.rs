use alloc::vec::Vec;

use crate::error::{Error, Result};

/// ROC-AUC as the Mann–Whitney statistic: the probability that a random
/// positive outscores a random negative, ties counting one half.
///
/// Pair counts are kept as exact integers. The larger of the two
/// complementary ratios is divided out and the smaller obtained by
/// subtraction from 1, which is exact for values in [0.5, 1]; hence
/// `roc_auc(s, y) + roc_auc(s, 1 - y) == 1.0` holds bit-for-bit.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("AUC scores"));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count() as u128;
    let neg = labels.len() as u128 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::AucUndefined);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("NaN filtered above"));

    // twice the number of (positive, negative) pairs won by the positive
    let mut wins2: u128 = 0;
    let mut neg_below: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let value = scores[order[start]];
        let mut end = start;
        let (mut gp, mut gn) = (0u128, 0u128);
        while end < order.len() && scores[order[end]] == value {
            if labels[order[end]] == 1 {
                gp += 1;
            } else {
                gn += 1;
            }
            end += 1;
        }
        wins2 += gp * (2 * neg_below + gn);
        neg_below += gn;
        start = end;
    }

    let total2 = 2 * pos * neg;
    let losses2 = total2 - wins2;
    let denom = total2 as f64;
    Ok(if wins2 >= losses2 {
        wins2 as f64 / denom
    } else {
        1.0 - losses2 as f64 / denom
    })
}
