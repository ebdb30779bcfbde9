//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the library's algorithms.
#![allow(dead_code, clippy::needless_range_loop)]

use sds_core::rng::SeededRng;

/// Straight-line plurality vote, scoring, 27% split and discrimination.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceProfile {
    pub voted: Vec<usize>,
    pub scores: Vec<usize>,
    pub top: Vec<usize>,
    pub bottom: Vec<usize>,
    pub discrimination: Vec<f64>,
}

pub fn reference_profile(predictions: &[Vec<usize>], classes: usize) -> ReferenceProfile {
    let n = predictions.len();
    let m = predictions[0].len();

    let mut voted = vec![0; m];
    for j in 0..m {
        let mut freq = vec![0usize; classes];
        for row in predictions {
            freq[row[j]] += 1;
        }
        let mut best = 0;
        for k in 1..classes {
            if freq[k] > freq[best] {
                best = k;
            }
        }
        voted[j] = best;
    }

    let mut scores = vec![0; n];
    for i in 0..n {
        for j in 0..m {
            if predictions[i][j] == voted[j] {
                scores[i] += 1;
            }
        }
    }

    // stable sort keeps ascending index among equal scores
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].cmp(&scores[a]));
    // round_half_up(0.27 n) in integer arithmetic, at least 1, at most n/2
    let size = ((27 * n + 50) / 100).max(1).min(n / 2);
    let mut top = order[..size].to_vec();
    let mut bottom = order[n - size..].to_vec();
    top.sort();
    bottom.sort();

    let mut discrimination = vec![0.0; m];
    for j in 0..m {
        let mut d: i64 = 0;
        for i in 0..n {
            if top.contains(&i) {
                if predictions[i][j] == voted[j] {
                    d += 1;
                }
            } else if bottom.contains(&i) && predictions[i][j] == voted[j] {
                d -= 1;
            }
        }
        discrimination[j] = d as f64 / size as f64;
    }

    ReferenceProfile {
        voted,
        scores,
        top,
        bottom,
        discrimination,
    }
}

/// Pearson's formula evaluated directly on two rank vectors.
pub fn direct_spearman(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Average ranks, 1 for the largest value.
pub fn midranks_desc(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let greater = values.iter().filter(|&&w| w > v).count() as f64;
            let equal = values.iter().filter(|&&w| w == v).count() as f64;
            greater + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn brute_cliffs_delta(a: &[f64], b: &[f64]) -> f64 {
    let mut gt = 0i64;
    let mut lt = 0i64;
    for &x in a {
        for &y in b {
            if x > y {
                gt += 1;
            } else if x < y {
                lt += 1;
            }
        }
    }
    (gt - lt) as f64 / (a.len() * b.len()) as f64
}

/// Two-sided exact p-values of the rank-sum statistic for tie-free data,
/// indexed by the first sample's rank sum. Built by listing every
/// `n1`-subset of the ranks `1..=n1+n2`.
pub fn enumerated_rank_sum_p(n1: usize, n2: usize) -> Vec<f64> {
    let total = n1 + n2;
    let max_sum = total * (total + 1) / 2;
    let mut freq = vec![0u64; max_sum + 1];
    for mask in 0u32..(1u32 << total) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let s: usize = (0..total).filter(|&k| mask & (1 << k) != 0).map(|k| k + 1).sum();
        freq[s] += 1;
    }
    let count: u64 = freq.iter().sum();
    (0..=max_sum)
        .map(|s| {
            let le: u64 = freq[..=s].iter().sum();
            let ge: u64 = freq[s..].iter().sum();
            (2.0 * le.min(ge) as f64 / count as f64).min(1.0)
        })
        .collect()
}

/// Every tie-free arrangement of `n1` and `n2` values, as the set of rank
/// positions held by the first sample.
pub fn arrangements(n1: usize, n2: usize) -> Vec<Vec<usize>> {
    let total = n1 + n2;
    (0u32..(1u32 << total))
        .filter(|m| m.count_ones() as usize == n1)
        .map(|m| (0..total).filter(|&k| m & (1 << k) != 0).map(|k| k + 1).collect())
        .collect()
}

/// Monte-Carlo permutation p-value of the rank-sum test (two-sided, by
/// distance of the rank sum from its mean).
pub fn monte_carlo_rank_sum_p(a: &[f64], b: &[f64], resamples: usize, seed: u64) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let ranks: Vec<f64> = pooled
        .iter()
        .map(|&v| {
            let less = pooled.iter().filter(|&&w| w < v).count() as f64;
            let equal = pooled.iter().filter(|&&w| w == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect();
    let n1 = a.len();
    let expected = n1 as f64 * (n as f64 + 1.0) / 2.0;
    let observed = (ranks[..n1].iter().sum::<f64>() - expected).abs();
    let mut rng = SeededRng::new(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut extreme = 0usize;
    for _ in 0..resamples {
        for k in 0..n1 {
            let r = k + rng.below(n - k);
            idx.swap(k, r);
        }
        let s: f64 = idx[..n1].iter().map(|&i| ranks[i]).sum();
        if (s - expected).abs() >= observed - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / resamples as f64
}
