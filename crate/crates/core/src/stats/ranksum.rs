use std::fmt;

use statrs::distribution::{ContinuousCDF, Normal};

use super::midranks;

/// Largest pooled size for which [`rank_sum`] enumerates the exact null
/// distribution.
pub const EXACT_MAX_TOTAL: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankSumMethod {
    /// Exact when the pooled size is at most [`EXACT_MAX_TOTAL`], normal
    /// approximation otherwise.
    Auto,
    Exact,
    Normal,
}

impl fmt::Display for RankSumMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankSumMethod::Auto => "auto",
            RankSumMethod::Exact => "exact",
            RankSumMethod::Normal => "normal approximation with continuity correction",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSum {
    /// Sum of the midranks of the first sample.
    pub statistic: f64,
    pub p_value: f64,
    /// Method actually used (never `Auto`).
    pub method: RankSumMethod,
}

/// Two-sided Wilcoxon rank-sum test.
///
/// ```
/// use bincue::stats::rank_sum;
///
/// let r = rank_sum(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]);
/// assert_eq!(r.p_value, 1.0);
/// ```
pub fn rank_sum(a: &[f64], b: &[f64]) -> RankSum {
    rank_sum_with(a, b, RankSumMethod::Auto)
}

pub fn rank_sum_with(a: &[f64], b: &[f64], method: RankSumMethod) -> RankSum {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let w: f64 = ranks[..a.len()].iter().sum();
    let method = match method {
        RankSumMethod::Auto if pooled.len() <= EXACT_MAX_TOTAL => RankSumMethod::Exact,
        RankSumMethod::Auto => RankSumMethod::Normal,
        m => m,
    };
    let p_value = if a.is_empty() || b.is_empty() {
        1.0
    } else if method == RankSumMethod::Exact {
        exact_p(&ranks, a.len(), w)
    } else {
        normal_p(&pooled, &ranks, a.len(), w)
    };
    RankSum { statistic: w, p_value, method }
}

/// Probability under random assignment that the rank sum of `k` pooled
/// values lies at least as far from its mean as `w`. Works on doubled
/// ranks so midranks stay integral.
fn exact_p(ranks: &[f64], k: usize, w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    // counts[j][s]: subsets of size j with doubled rank sum s
    let mut counts = vec![vec![0.0f64; max_sum + 1]; k + 1];
    counts[0][0] = 1.0;
    for &r in &doubled {
        for j in (1..=k).rev() {
            let (lo, hi) = counts.split_at_mut(j);
            for s in (r..=max_sum).rev() {
                hi[0][s] += lo[j - 1][s - r];
            }
        }
    }
    let total: f64 = counts[k].iter().sum();
    let center = k as f64 * max_sum as f64 / ranks.len() as f64;
    let observed = (2.0 * w - center).abs();
    let extreme: f64 = counts[k]
        .iter()
        .enumerate()
        .filter(|(s, _)| (*s as f64 - center).abs() >= observed - 1e-9)
        .map(|(_, c)| c)
        .sum();
    (extreme / total).min(1.0)
}

fn normal_p(pooled: &[f64], ranks: &[f64], k: usize, w: f64) -> f64 {
    let n = pooled.len() as f64;
    let (na, nb) = (k as f64, n - k as f64);
    let mu = na * (n + 1.0) / 2.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|r| **r == sorted[i]).count();
        let t = j as f64;
        ties += t * t * t - t;
        i += j;
    }
    let var = na * nb / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if !(var > 0.0) {
        return 1.0;
    }
    let z = ((w - mu).abs() - 0.5).max(0.0) / var.sqrt();
    (2.0 * Normal::standard().sf(z)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute force over all subsets of size `k`.
    fn enumerate_p(a: &[f64], b: &[f64]) -> f64 {
        let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        let ranks = midranks(&pooled);
        let n = pooled.len();
        let k = a.len();
        let w: f64 = ranks[..k].iter().sum();
        let center = k as f64 * (n as f64 + 1.0) / 2.0;
        let (mut hits, mut total) = (0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let s: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
            total += 1;
            if (s - center).abs() >= (w - center).abs() - 1e-9 {
                hits += 1;
            }
        }
        hits as f64 / total as f64
    }

    #[test]
    fn separated_samples() {
        let a: Vec<f64> = (1..=10).map(f64::from).collect();
        let b: Vec<f64> = (11..=20).map(f64::from).collect();
        let r = rank_sum(&a, &b);
        assert_eq!(r.method, RankSumMethod::Normal);
        assert!(r.p_value < 0.001);
        // only the two fully separated splits are as extreme
        let exact = rank_sum_with(&a, &b, RankSumMethod::Exact);
        assert!((exact.p_value - 2.0 / 184_756.0).abs() < 1e-15);
        assert_eq!(exact.statistic, 55.0);
    }

    #[test]
    fn identical_samples_have_p_one() {
        let a = [3.0, 1.0, 2.0, 2.0];
        assert_eq!(rank_sum(&a, &a).p_value, 1.0);
        assert_eq!(rank_sum_with(&a, &a, RankSumMethod::Normal).p_value, 1.0);
    }

    #[test]
    fn exact_matches_brute_force_with_ties() {
        let a = [1.0, 2.0, 2.0, 5.0, 7.0];
        let b = [2.0, 3.0, 5.0, 8.0, 9.0, 9.0, 10.0];
        let r = rank_sum(&a, &b);
        assert_eq!(r.method, RankSumMethod::Exact);
        assert!((r.p_value - enumerate_p(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn exact_and_normal_agree_at_the_boundary() {
        let cases: [(&[f64], &[f64]); 3] = [
            (&[1.0, 3.0, 5.0, 7.0, 9.0, 11.0], &[2.0, 4.0, 6.0, 8.0, 10.0, 12.0]),
            (&[1.0, 2.0, 4.0, 7.0, 9.0, 10.0], &[3.0, 5.0, 6.0, 8.0, 11.0, 12.0, 13.0]),
            (&[1.0, 2.0, 3.0, 5.0, 8.0, 13.0], &[4.0, 6.0, 7.0, 9.0, 10.0, 11.0, 12.0]),
        ];
        for (a, b) in cases {
            let e = rank_sum_with(a, b, RankSumMethod::Exact).p_value;
            let n = rank_sum_with(a, b, RankSumMethod::Normal).p_value;
            assert!((e - n).abs() < 0.02, "{a:?} {b:?}: exact {e} normal {n}");
        }
    }

    #[test]
    fn empty_sample_gives_p_one() {
        assert_eq!(rank_sum(&[], &[1.0, 2.0]).p_value, 1.0);
    }

    proptest! {
        #[test]
        fn swapping_samples_keeps_p(
            a in prop::collection::vec(0i32..8, 1..7),
            b in prop::collection::vec(0i32..8, 1..9),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let ab = rank_sum(&a, &b);
            let ba = rank_sum(&b, &a);
            prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab.p_value));
            if a.len() + b.len() <= EXACT_MAX_TOTAL {
                prop_assert!((ab.p_value - enumerate_p(&a, &b)).abs() < 1e-12);
            }
        }
    }
}
