//! Rankings of models and the indicators comparing an estimated ranking with
//! the actual one: Spearman's ρ and top-k Jaccard similarity.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::context::{accuracy, Accuracy, GroundTruth, PredictionMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::selection::{Method, VotedLabels};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankingSource {
    Actual,
    Estimated,
    Voted,
}

/// Tied ranks of models, 1 = best; tied models share the mean of their positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking<T> {
    pub ranks: Vec<T>,
    pub source: RankingSource,
}

impl<T: Scalar> Ranking<T> {
    /// Larger score ranks better.
    pub fn from_scores<K: PartialOrd>(scores: &[K], source: RankingSource) -> Self {
        Self {
            ranks: tied_ranks_desc(scores),
            source,
        }
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// The `k` best models; ties at the boundary go to the lower model index.
    pub fn top_k(&self, k: usize) -> Result<BTreeSet<usize>> {
        let n = self.ranks.len();
        if k == 0 || k > n {
            return Err(Error::invalid(format!("k must lie in 1..={n}, got {k}")));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            self.ranks[a]
                .partial_cmp(&self.ranks[b])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        Ok(order.into_iter().take(k).collect())
    }
}

/// Tied ranks where the largest value receives rank 1.
pub fn tied_ranks_desc<K: PartialOrd, T: Scalar>(values: &[K]) -> Vec<T> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut ranks = vec![T::zero(); n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean
        let mean = T::of((start + 1 + end) as f64 / 2.0);
        for &i in &order[start..end] {
            ranks[i] = mean;
        }
        start = end;
    }
    ranks
}

/// Per-model accuracy over `subset`.
pub fn accuracies(
    matrix: &PredictionMatrix,
    truth: &GroundTruth,
    subset: &[usize],
) -> Result<Vec<Accuracy>> {
    (0..matrix.model_count())
        .map(|i| accuracy(matrix, i, truth, subset))
        .collect()
}

pub fn rank_by_accuracy<T: Scalar>(
    matrix: &PredictionMatrix,
    truth: &GroundTruth,
    subset: &[usize],
    source: RankingSource,
) -> Result<Ranking<T>> {
    let acc = accuracies(matrix, truth, subset)?;
    Ok(Ranking::from_scores(&acc, source))
}

/// Pearson correlation of two rank vectors.
pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "rank vectors differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::invalid("correlation needs at least 2 models"));
    }
    let n = T::of_usize(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(Error::ConstantRanks);
    }
    let rho = sxy / (sxx * syy).sqrt();
    Ok(rho.max(-T::one()).min(T::one()))
}

/// Spearman's ρ between two rankings.
pub fn ranking_spearman<T: Scalar>(estimated: &Ranking<T>, actual: &Ranking<T>) -> Result<T> {
    spearman(&estimated.ranks, &actual.ranks)
}

/// `|A ∩ B| / |A ∪ B|` for the two top-k model sets.
pub fn jaccard_topk<T: Scalar>(estimated: &Ranking<T>, actual: &Ranking<T>, k: usize) -> Result<T> {
    if estimated.len() != actual.len() {
        return Err(Error::invalid("rankings cover different model counts"));
    }
    let a = estimated.top_k(k)?;
    let b = actual.top_k(k)?;
    let inter = a.intersection(&b).count();
    let union = a.union(&b).count();
    Ok(T::of_usize(inter) / T::of_usize(union))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedBucket<T> {
    pub matched: usize,
    pub total: usize,
    pub rate: T,
}

/// Agreement of voted labels with the actual labels, overall and bucketed by
/// the number of votes the winning label received.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedRate<T> {
    pub overall: T,
    pub buckets: BTreeMap<usize, MatchedBucket<T>>,
}

pub fn matched_rate<T: Scalar>(voted: &VotedLabels, truth: &GroundTruth) -> Result<MatchedRate<T>> {
    if truth.len() != voted.len() || !truth.is_complete() {
        return Err(Error::MissingTruth);
    }
    if voted.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut raw: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut matched = 0;
    for (j, (&label, &votes)) in voted.labels.iter().zip(&voted.vote_counts).enumerate() {
        let hit = truth.get(j) == Some(label);
        let e = raw.entry(votes).or_default();
        e.1 += 1;
        if hit {
            e.0 += 1;
            matched += 1;
        }
    }
    let buckets = raw
        .into_iter()
        .map(|(v, (matched, total))| {
            let rate = T::of_usize(matched) / T::of_usize(total);
            (v, MatchedBucket { matched, total, rate })
        })
        .collect();
    Ok(MatchedRate {
        overall: T::of_usize(matched) / T::of_usize(voted.len()),
        buckets,
    })
}

/// Estimated-vs-actual comparison for one selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingOutcome<T> {
    pub spearman: T,
    pub jaccard: BTreeMap<usize, T>,
    pub estimated: Ranking<T>,
    pub actual: Ranking<T>,
    pub budget: usize,
    pub method: Method,
}
