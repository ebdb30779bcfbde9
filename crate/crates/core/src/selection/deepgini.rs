//! Impurity-based baselines: deterministic top-ξ selection (DDG) and random
//! selection within the top-ξ pool (RDG).

use serde::{Deserialize, Serialize};

use crate::context::{Budget, ProbabilityTensor};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::sds::{candidate_pool_size, check_cutoff, draw};
use super::{Method, SelectionResult};

/// Whose probabilities drive the impurity scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "model")]
pub enum GiniSource {
    Model(usize),
    /// Mean impurity across all models.
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiniScores<T> {
    pub values: Vec<T>,
    pub source: GiniSource,
}

impl<T: Scalar> GiniScores<T> {
    /// Sample indices by impurity descending, ties by ascending index.
    pub fn order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| {
            self.values[b]
                .partial_cmp(&self.values[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        order
    }
}

/// `1 - Σ p_k²`.
pub fn gini_impurity<T: Scalar>(row: &[T]) -> T {
    T::one() - row.iter().map(|&p| p * p).sum::<T>()
}

pub fn gini_scores<T: Scalar>(
    probs: Option<&ProbabilityTensor<T>>,
    source: GiniSource,
) -> Result<GiniScores<T>> {
    let probs = probs.ok_or(Error::MissingProbabilities)?;
    let m = probs.sample_count();
    let values = match source {
        GiniSource::Model(i) => {
            if i >= probs.model_count() {
                return Err(Error::invalid(format!("model index {i} out of range")));
            }
            (0..m).map(|j| gini_impurity(probs.row(i, j))).collect()
        }
        GiniSource::Pooled => {
            let n = T::of_usize(probs.model_count());
            (0..m)
                .map(|j| {
                    (0..probs.model_count())
                        .map(|i| gini_impurity(probs.row(i, j)))
                        .sum::<T>()
                        / n
                })
                .collect()
        }
    };
    Ok(GiniScores { values, source })
}

/// The `budget` samples with the largest impurity.
pub fn ddg_select<T: Scalar>(gini: &GiniScores<T>, budget: Budget) -> Result<SelectionResult> {
    let m = gini.values.len();
    if budget.effort() > m {
        return Err(Error::invalid(format!(
            "budget {} exceeds sample count {m}",
            budget.effort()
        )));
    }
    let mut indices = gini.order();
    indices.truncate(budget.effort());
    Ok(SelectionResult {
        indices,
        method: Method::Ddg,
        seed: None,
        candidate_pool_size: m,
    })
}

/// Uniform draw of `budget` samples from the top `ceil(cutoff * m)` by impurity.
pub fn rdg_select<T: Scalar>(
    gini: &GiniScores<T>,
    budget: Budget,
    cutoff: f64,
    seed: u64,
) -> Result<SelectionResult> {
    check_cutoff(cutoff)?;
    let order = gini.order();
    let pool = &order[..candidate_pool_size(order.len(), cutoff)];
    draw(Method::Rdg, pool, budget, seed)
}
