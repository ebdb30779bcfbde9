//! Two-sample comparison: Wilcoxon rank-sum test, Cliff's delta and the
//! win/tie/lose verdict built from them.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Significance level for verdicts.
pub const ALPHA: f64 = 0.05;
/// Largest combined sample size handled by exact enumeration.
pub const EXACT_MAX_TOTAL: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankSumMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSumTest<T> {
    /// Mann–Whitney U of the first sample.
    pub u: T,
    pub p_value: T,
    pub method: RankSumMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Magnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

impl Magnitude {
    pub fn of(delta: f64) -> Self {
        let d = delta.abs();
        if d < 0.147 {
            Magnitude::Negligible
        } else if d < 0.330 {
            Magnitude::Small
        } else if d < 0.474 {
            Magnitude::Medium
        } else {
            Magnitude::Large
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    W,
    T,
    L,
}

impl Verdict {
    pub fn decide(p_value: f64, delta: f64) -> Self {
        if p_value < ALPHA && delta > 0.147 {
            Verdict::W
        } else if p_value < ALPHA && delta < -0.147 {
            Verdict::L
        } else {
            Verdict::T
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::W => "W",
            Verdict::T => "T",
            Verdict::L => "L",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonStats<T> {
    pub p_value: T,
    pub delta: T,
    pub magnitude: Magnitude,
    pub verdict: Verdict,
}

struct Pooled {
    /// Doubled midranks of the first sample, so every rank is an integer.
    doubled_ranks_a: Vec<u64>,
    doubled_ranks: Vec<u64>,
    tie_sizes: Vec<usize>,
}

fn pool<T: Scalar>(a: &[T], b: &[T]) -> Result<Pooled> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("rank-sum test needs two non-empty samples"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::invalid("NaN in rank-sum input"));
    }
    let values: Vec<(T, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&x, &y| values[x].0.partial_cmp(&values[y].0).unwrap_or(Ordering::Equal));

    let mut doubled = vec![0u64; values.len()];
    let mut tie_sizes = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]].0 == values[order[start]].0 {
            end += 1;
        }
        // positions start+1..=end, doubled midrank = start+1+end
        let r = (start + 1 + end) as u64;
        for &i in &order[start..end] {
            doubled[i] = r;
        }
        tie_sizes.push(end - start);
        start = end;
    }
    Ok(Pooled {
        doubled_ranks_a: doubled[..a.len()].to_vec(),
        doubled_ranks: doubled,
        tie_sizes,
    })
}

/// Exact two-sided p-value by enumerating every assignment of the pooled
/// (mid)ranks to the first sample: `min(1, 2·min(P(S ≤ s), P(S ≥ s)))`.
pub fn wilcoxon_exact<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    let pooled = pool(a, b)?;
    Ok(T::of(exact_p(&pooled, a.len())))
}

fn exact_p(pooled: &Pooled, n1: usize) -> f64 {
    let total: u64 = pooled.doubled_ranks.iter().sum();
    let width = total as usize + 1;
    // ways[k][s]: number of k-subsets of the processed ranks with sum s
    let mut ways = vec![vec![0f64; width]; n1 + 1];
    ways[0][0] = 1.0;
    for &r in &pooled.doubled_ranks {
        let r = r as usize;
        for k in (1..=n1).rev() {
            let (lower, upper) = ways.split_at_mut(k);
            let prev = &lower[k - 1];
            let cur = &mut upper[0];
            for s in (r..width).rev() {
                if prev[s - r] != 0.0 {
                    cur[s] += prev[s - r];
                }
            }
        }
    }
    let dist = &ways[n1];
    let count: f64 = dist.iter().sum();
    let observed = pooled.doubled_ranks_a.iter().sum::<u64>() as usize;
    let le: f64 = dist[..=observed].iter().sum::<f64>() / count;
    let ge: f64 = dist[observed..].iter().sum::<f64>() / count;
    (2.0 * le.min(ge)).min(1.0)
}

/// Normal approximation with tie-corrected variance and continuity correction.
pub fn wilcoxon_normal<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    let pooled = pool(a, b)?;
    Ok(T::of(normal_p(&pooled, a.len(), b.len()).1))
}

fn normal_p(pooled: &Pooled, n1: usize, n2: usize) -> (f64, f64) {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let n = n1f + n2f;
    let rank_sum = pooled.doubled_ranks_a.iter().sum::<u64>() as f64 / 2.0;
    let u = rank_sum - n1f * (n1f + 1.0) / 2.0;
    let mean = n1f * n2f / 2.0;
    let ties: f64 = pooled
        .tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let tie_term = if n > 1.0 { ties / (n * (n - 1.0)) } else { 0.0 };
    let var = n1f * n2f / 12.0 * ((n + 1.0) - tie_term);
    if var <= 0.0 {
        return (u, 1.0);
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    (u, libm::erfc(z / std::f64::consts::SQRT_2).min(1.0))
}

/// Two-sided rank-sum test; exact when the pooled sample has at most
/// [`EXACT_MAX_TOTAL`] values and no ties, normal approximation otherwise.
pub fn rank_sum_test<T: Scalar>(a: &[T], b: &[T]) -> Result<RankSumTest<T>> {
    let pooled = pool(a, b)?;
    let tie_free = pooled.tie_sizes.iter().all(|&t| t == 1);
    let (u, normal) = normal_p(&pooled, a.len(), b.len());
    let (p, method) = if a.len() + b.len() <= EXACT_MAX_TOTAL && tie_free {
        (exact_p(&pooled, a.len()), RankSumMethod::Exact)
    } else {
        (normal, RankSumMethod::Normal)
    };
    Ok(RankSumTest {
        u: T::of(u),
        p_value: T::of(p),
        method,
    })
}

pub fn wilcoxon_rank_sum<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    rank_sum_test(a, b).map(|t| t.p_value)
}

/// `(#{a_i > b_j} - #{a_i < b_j}) / (|a|·|b|)`.
pub fn cliffs_delta<T: Scalar>(a: &[T], b: &[T]) -> Result<(T, Magnitude)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("Cliff's delta needs two non-empty samples"));
    }
    let mut dominance: i64 = 0;
    for &x in a {
        for &y in b {
            match x.partial_cmp(&y) {
                Some(Ordering::Greater) => dominance += 1,
                Some(Ordering::Less) => dominance -= 1,
                Some(Ordering::Equal) => {}
                None => return Err(Error::invalid("NaN in Cliff's delta input")),
            }
        }
    }
    let delta = dominance as f64 / (a.len() * b.len()) as f64;
    Ok((T::of(delta), Magnitude::of(delta)))
}

/// Compares `ours` against `baseline`: W when significantly and
/// non-negligibly better, L when significantly and non-negligibly worse.
pub fn wtl_compare<T: Scalar>(ours: &[T], baseline: &[T]) -> Result<ComparisonStats<T>> {
    let p = wilcoxon_rank_sum(ours, baseline)?;
    let (delta, magnitude) = cliffs_delta(ours, baseline)?;
    Ok(ComparisonStats {
        p_value: p,
        delta,
        magnitude,
        verdict: Verdict::decide(p.as_f64(), delta.as_f64()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_examples() {
        let t = rank_sum_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(t.method, RankSumMethod::Exact);
        assert!((t.p_value - 0.1f64).abs() < 1e-12);
        assert_eq!(wilcoxon_exact(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
    }

    #[test]
    fn all_tied_is_p_one() {
        assert_eq!(wilcoxon_rank_sum(&[0.5f64; 30], &[0.5f64; 30]).unwrap(), 1.0);
    }

    #[test]
    fn empty_input_errors() {
        assert!(wilcoxon_rank_sum::<f64>(&[], &[1.0]).is_err());
        assert!(cliffs_delta::<f64>(&[1.0], &[]).is_err());
    }

    #[test]
    fn delta_examples() {
        assert_eq!(cliffs_delta(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), (0.0, Magnitude::Negligible));
        assert_eq!(cliffs_delta(&[5.0, 6.0], &[1.0, 2.0]).unwrap(), (1.0, Magnitude::Large));
        assert_eq!(cliffs_delta(&[2.0, 2.0], &[1.0, 3.0]).unwrap().0, 0.0);
    }

    #[test]
    fn magnitude_bands() {
        assert_eq!(Magnitude::of(0.1469), Magnitude::Negligible);
        assert_eq!(Magnitude::of(-0.147), Magnitude::Small);
        assert_eq!(Magnitude::of(0.33), Magnitude::Medium);
        assert_eq!(Magnitude::of(0.474), Magnitude::Large);
    }

    #[test]
    fn verdicts() {
        let low: Vec<f64> = (0..50).map(|i| i as f64 / 100.0).collect();
        let high: Vec<f64> = (0..50).map(|i| 1.0 + i as f64 / 100.0).collect();
        assert_eq!(wtl_compare(&high, &low).unwrap().verdict, Verdict::W);
        assert_eq!(wtl_compare(&low, &high).unwrap().verdict, Verdict::L);
        assert_eq!(wtl_compare(&low, &low).unwrap().verdict, Verdict::T);
        let s = wtl_compare(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(s.delta, -1.0);
        assert_eq!(s.verdict, Verdict::T);
        // significant but negligible effect stays a tie
        assert_eq!(Verdict::decide(0.01, 0.1), Verdict::T);
    }
}
