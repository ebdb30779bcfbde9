//! Label-free sample discrimination: majority voting, model scoring against
//! the voted labels, the top/bottom model split, and the per-sample
//! top-minus-bottom agreement count.

use serde::{Deserialize, Serialize};

use crate::context::{LabelSet, PredictionMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default share of models placed in each of the top and bottom groups.
pub const DEFAULT_GROUP_FRACTION: f64 = 0.27;

// Guards rounding against representation error such as 0.27 * 50 = 13.500000000000002.
const ROUNDING_SLACK: f64 = 1e-9;

/// Plurality-vote estimate of each sample's label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VotedLabels {
    pub labels: Vec<usize>,
    /// Votes received by the winning label.
    pub vote_counts: Vec<usize>,
}

impl VotedLabels {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Agreement of each model with the voted labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelScores {
    pub scores: Vec<usize>,
    /// Model indices by score descending, ties by ascending index.
    pub order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopBottomPartition {
    pub top: Vec<usize>,
    pub bottom: Vec<usize>,
    pub fraction: f64,
}

impl TopBottomPartition {
    pub fn group_size(&self) -> usize {
        self.top.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationProfile<T> {
    /// Per-sample discrimination in `[-1, 1]`.
    pub values: Vec<T>,
    /// Unnormalized top-minus-bottom counts.
    pub counts: Vec<i64>,
    pub voted: VotedLabels,
    pub scores: ModelScores,
    pub partition: TopBottomPartition,
}

impl<T: Scalar> DiscriminationProfile<T> {
    /// Runs the full pipeline: vote, score, split, discriminate.
    pub fn compute(matrix: &PredictionMatrix, labels: &LabelSet, fraction: f64) -> Result<Self> {
        let voted = majority_vote(matrix, labels);
        let scores = score_models(matrix, &voted);
        let partition = partition_top_bottom(&scores, fraction)?;
        let counts = discrimination_counts(matrix, &voted, &partition);
        let values = normalize(&counts, partition.group_size());
        Ok(Self {
            values,
            counts,
            voted,
            scores,
            partition,
        })
    }

    /// Sample indices by discrimination descending, ties by ascending index.
    pub fn order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.counts.len()).collect();
        // counts share one positive divisor, so ordering them is exact
        order.sort_by(|&a, &b| self.counts[b].cmp(&self.counts[a]).then(a.cmp(&b)));
        order
    }
}

/// Most frequent predicted class per sample; frequency ties go to the
/// smallest class index.
pub fn majority_vote(matrix: &PredictionMatrix, labels: &LabelSet) -> VotedLabels {
    let m = matrix.sample_count();
    let mut freq = vec![0usize; labels.class_count()];
    let mut voted = Vec::with_capacity(m);
    let mut counts = Vec::with_capacity(m);
    for j in 0..m {
        freq.iter_mut().for_each(|f| *f = 0);
        for label in matrix.column(j) {
            freq[label] += 1;
        }
        let (best, &votes) = freq
            .iter()
            .enumerate()
            .fold((0, &0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        voted.push(best);
        counts.push(votes);
    }
    VotedLabels {
        labels: voted,
        vote_counts: counts,
    }
}

pub fn score_models(matrix: &PredictionMatrix, voted: &VotedLabels) -> ModelScores {
    let scores: Vec<usize> = matrix
        .rows()
        .map(|row| row.iter().zip(&voted.labels).filter(|(p, v)| p == v).count())
        .collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(a.cmp(&b)));
    ModelScores { scores, order }
}

/// Size of each of the top and bottom groups for `n` models:
/// `max(1, round_half_up(fraction * n))`, capped at `n / 2` so the groups
/// never overlap.
pub fn group_size(n: usize, fraction: f64) -> usize {
    let rounded = (fraction * n as f64 + 0.5 + ROUNDING_SLACK).floor() as usize;
    rounded.max(1).min(n / 2)
}

pub fn partition_top_bottom(scores: &ModelScores, fraction: f64) -> Result<TopBottomPartition> {
    if !(fraction > 0.0 && fraction <= 0.5) {
        return Err(Error::invalid(format!(
            "group fraction must lie in (0, 0.5], got {fraction}"
        )));
    }
    let n = scores.order.len();
    if n < 2 {
        return Err(Error::invalid("partition needs at least 2 models"));
    }
    let size = group_size(n, fraction);
    // The bottom group is read from the same descending order, so a tie at
    // the lower boundary keeps the lower-index model out of the bottom group.
    let mut bottom: Vec<usize> = scores.order[n - size..].to_vec();
    bottom.reverse();
    Ok(TopBottomPartition {
        top: scores.order[..size].to_vec(),
        bottom,
        fraction,
    })
}

/// Per-sample `#top models agreeing with the vote - #bottom models agreeing`.
pub fn discrimination_counts(
    matrix: &PredictionMatrix,
    voted: &VotedLabels,
    partition: &TopBottomPartition,
) -> Vec<i64> {
    let mut counts = vec![0i64; matrix.sample_count()];
    for (group, weight) in [(&partition.top, 1i64), (&partition.bottom, -1i64)] {
        for &i in group {
            for (c, (p, v)) in counts.iter_mut().zip(matrix.row(i).iter().zip(&voted.labels)) {
                if p == v {
                    *c += weight;
                }
            }
        }
    }
    counts
}

/// Normalized discrimination values (counts divided by the top-group size).
pub fn compute_discrimination<T: Scalar>(
    matrix: &PredictionMatrix,
    voted: &VotedLabels,
    partition: &TopBottomPartition,
) -> Vec<T> {
    normalize(&discrimination_counts(matrix, voted, partition), partition.group_size())
}

fn normalize<T: Scalar>(counts: &[i64], size: usize) -> Vec<T> {
    let d = T::of_usize(size);
    counts
        .iter()
        .map(|&c| T::of(c as f64) / d)
        .collect()
}
