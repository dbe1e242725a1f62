//! Sample summaries and the two-sided Wilcoxon rank-sum test used for the
//! `+ / - / =` marks in result tables.

use std::fmt;

use statrs::distribution::{ContinuousCDF, Normal};

pub const ALPHA: f64 = 0.05;

/// Pooled sample sizes up to this use the exact permutation distribution.
pub const EXACT_LIMIT: usize = 50;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n - 1` denominator); 0 below two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankSum {
    /// Rank sum of the first sample.
    pub statistic: f64,
    pub p_value: f64,
    pub exact: bool,
}

/// Twice the midranks of the pooled sample, so ties stay integral.
fn doubled_midranks(pooled: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0; pooled.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && pooled[order[end]] == pooled[order[start]] {
            end += 1;
        }
        // ranks start..end (1-based: start+1 ..= end) share their mean
        let doubled = (start + 1 + end) as u64;
        for &k in &order[start..end] {
            ranks[k] = doubled;
        }
        start = end;
    }
    ranks
}

/// Two-sided rank-sum test of `a` against `b`. `None` when either sample is
/// empty.
pub fn rank_sum(a: &[f64], b: &[f64]) -> Option<RankSum> {
    if a.len() + b.len() <= EXACT_LIMIT {
        rank_sum_exact(a, b)
    } else {
        rank_sum_normal(a, b)
    }
}

/// Exact p-value from the permutation distribution of the rank sum, counted
/// by dynamic programming over subsets of the pooled midranks.
pub fn rank_sum_exact(a: &[f64], b: &[f64]) -> Option<RankSum> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let (n1, n) = (a.len(), pooled.len());
    let observed: u64 = ranks[..n1].iter().sum();
    let total: u64 = ranks.iter().sum();
    // ways[j][s]: subsets of size j with doubled rank sum s
    let mut ways = vec![vec![0u128; total as usize + 1]; n1 + 1];
    ways[0][0] = 1;
    for &r in &ranks {
        for j in (1..=n1).rev() {
            for s in (r as usize..=total as usize).rev() {
                let add = ways[j - 1][s - r as usize];
                if add > 0 {
                    ways[j][s] += add;
                }
            }
        }
    }
    let center = (n1 * (n + 1)) as i64;
    let dev = (observed as i64 - center).abs();
    let mut extreme = 0u128;
    let mut all = 0u128;
    for (s, &w) in ways[n1].iter().enumerate() {
        all += w;
        if (s as i64 - center).abs() >= dev {
            extreme += w;
        }
    }
    Some(RankSum {
        statistic: observed as f64 / 2.0,
        p_value: (extreme as f64 / all as f64).min(1.0),
        exact: true,
    })
}

/// Normal approximation with tie correction and continuity correction.
pub fn rank_sum_normal(a: &[f64], b: &[f64]) -> Option<RankSum> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let w = ranks[..a.len()].iter().sum::<u64>() as f64 / 2.0;
    let mu = n1 * (n + 1.0) / 2.0;

    let mut sorted = ranks.clone();
    sorted.sort_unstable();
    let mut tie_term = 0.0;
    for group in sorted.chunk_by(|x, y| x == y) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = ((w - mu).abs() - 0.5).max(0.0) / var.sqrt();
        let normal = Normal::standard();
        (2.0 * normal.sf(z)).min(1.0)
    };
    Some(RankSum {
        statistic: w,
        p_value,
        exact: false,
    })
}

/// Outcome of comparing a candidate against the reference algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mark {
    Better,
    Worse,
    Same,
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mark::Better => "+",
            Mark::Worse => "-",
            Mark::Same => "=",
        })
    }
}

/// Significant difference at [`ALPHA`] decides by the means; otherwise `=`.
pub fn compare(candidate: &[f64], reference: &[f64], lower_is_better: bool) -> Mark {
    match rank_sum(candidate, reference) {
        Some(t) if t.p_value < ALPHA => {
            let better = if lower_is_better {
                mean(candidate) < mean(reference)
            } else {
                mean(candidate) > mean(reference)
            };
            if better {
                Mark::Better
            } else {
                Mark::Worse
            }
        }
        _ => Mark::Same,
    }
}
