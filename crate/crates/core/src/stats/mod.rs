//! Normality testing, Box-Cox correction, rank-sum comparison and a
//! fixed-effects regression with an interaction term.

mod normality;
mod ranksum;
mod regression;

pub use normality::{anderson_darling, box_cox, box_cox_shifted, AndersonDarling, BoxCoxResult};
pub use ranksum::{rank_sum, rank_sum_with, RankSum, RankSumMethod, EXACT_MAX_TOTAL};
pub use regression::{ols_interaction, RegressionResult, COEFFICIENT_NAMES};

use crate::error::{Error, Result};

/// Ranks starting at 1, with ties given the mean of the ranks they span.
///
/// ```
/// assert_eq!(bincue::stats::midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
/// ```
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation (Pearson correlation of midranks).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid(format!(
            "spearman needs two equal-length samples of at least 2 values, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    pearson(&midranks(x), &midranks(y)).ok_or_else(|| Error::invalid("spearman undefined for a constant sample"))
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midranks_without_ties_are_positions() {
        assert_eq!(midranks(&[10.0, 30.0, 20.0]), vec![1.0, 3.0, 2.0]);
        assert_eq!(midranks(&[5.0; 4]), vec![2.5; 4]);
    }

    #[test]
    fn spearman_of_monotone_data() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&x, &[1.0, 4.0, 9.0, 16.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &[0.9, 0.5, 0.3, 0.1]).unwrap() + 1.0).abs() < 1e-12);
        assert!(spearman(&x, &[1.0; 4]).is_err());
        assert!(spearman(&x, &[1.0]).is_err());
    }
}
