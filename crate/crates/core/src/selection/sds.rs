use crate::context::{Budget, LabelSet, PredictionMatrix};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::scalar::Scalar;

use super::{DiscriminationProfile, Method, SelectionResult};

/// Default share of samples (by discrimination) that forms the candidate pool.
pub const DEFAULT_CUTOFF: f64 = 0.25;

const ROUNDING_SLACK: f64 = 1e-9;

/// `ceil(cutoff * m)`, at least 1 and at most `m`.
pub fn candidate_pool_size(m: usize, cutoff: f64) -> usize {
    let raw = (cutoff * m as f64 - ROUNDING_SLACK).ceil();
    (raw.max(1.0) as usize).min(m)
}

pub(crate) fn check_cutoff(cutoff: f64) -> Result<()> {
    if cutoff > 0.0 && cutoff <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("cutoff must lie in (0, 1], got {cutoff}")))
    }
}

/// Discrimination-based selector with the profile computed once, so repeated
/// draws only pay for the random sampling.
#[derive(Debug, Clone)]
pub struct SdsSelector<T> {
    profile: DiscriminationProfile<T>,
    order: Vec<usize>,
}

impl<T: Scalar> SdsSelector<T> {
    pub fn new(matrix: &PredictionMatrix, labels: &LabelSet, fraction: f64) -> Result<Self> {
        let profile = DiscriminationProfile::compute(matrix, labels, fraction)?;
        let order = profile.order();
        Ok(Self { profile, order })
    }

    pub fn profile(&self) -> &DiscriminationProfile<T> {
        &self.profile
    }

    /// Samples by discrimination descending, ties by ascending index.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn candidates(&self, cutoff: f64) -> Result<&[usize]> {
        check_cutoff(cutoff)?;
        Ok(&self.order[..candidate_pool_size(self.order.len(), cutoff)])
    }

    pub fn select(&self, budget: Budget, cutoff: f64, seed: u64) -> Result<SelectionResult> {
        let pool = self.candidates(cutoff)?;
        draw(Method::Sds, pool, budget, seed)
    }
}

pub(crate) fn draw(method: Method, pool: &[usize], budget: Budget, seed: u64) -> Result<SelectionResult> {
    if budget.effort() > pool.len() {
        return Err(Error::BudgetExceedsPool {
            budget: budget.effort(),
            pool: pool.len(),
        });
    }
    let indices = SeededRng::new(seed).sample_distinct(pool, budget.effort());
    Ok(SelectionResult {
        indices,
        method,
        seed: Some(seed),
        candidate_pool_size: pool.len(),
    })
}

/// Sample Discrimination based Selection: draws `budget` samples uniformly
/// from the top `ceil(cutoff * m)` samples by discrimination.
pub fn sds_select(
    matrix: &PredictionMatrix,
    labels: &LabelSet,
    budget: Budget,
    cutoff: f64,
    seed: u64,
) -> Result<SelectionResult> {
    SdsSelector::<f64>::new(matrix, labels, super::DEFAULT_GROUP_FRACTION)?.select(budget, cutoff, seed)
}

/// Simple random sampling over all `m` samples.
pub fn srs_select(m: usize, budget: Budget, seed: u64) -> Result<SelectionResult> {
    let pool: Vec<usize> = (0..m).collect();
    draw(Method::Srs, &pool, budget, seed).map_err(|e| match e {
        Error::BudgetExceedsPool { budget, pool } => {
            Error::invalid(format!("budget {budget} exceeds sample count {pool}"))
        }
        e => e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fig3;

    fn budget(e: usize) -> Budget {
        Budget::new(e).unwrap()
    }

    #[test]
    fn pool_sizes() {
        assert_eq!(candidate_pool_size(4, 0.25), 1);
        assert_eq!(candidate_pool_size(8, 0.25), 2);
        assert_eq!(candidate_pool_size(10, 0.25), 3);
        assert_eq!(candidate_pool_size(10000, 0.25), 2500);
        assert_eq!(candidate_pool_size(1, 0.25), 1);
        assert_eq!(candidate_pool_size(7, 1.0), 7);
    }

    #[test]
    fn fig3_half_cutoff_takes_both_discriminating_samples() {
        let (matrix, labels) = fig3();
        let r = sds_select(&matrix, &labels, budget(2), 0.5, 11).unwrap();
        let mut idx = r.indices.clone();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 2]);
        assert_eq!(r.candidate_pool_size, 2);
    }

    #[test]
    fn budget_over_pool_is_an_error() {
        let (matrix, labels) = fig3();
        let err = sds_select(&matrix, &labels, budget(2), 0.25, 0).unwrap_err();
        assert!(err.to_string().contains("budget exceeds candidate pool"));
    }

    #[test]
    fn deterministic_given_seed() {
        let (matrix, labels) = fig3();
        let a = sds_select(&matrix, &labels, budget(1), 0.5, 99).unwrap();
        let b = sds_select(&matrix, &labels, budget(1), 0.5, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn srs_exhaustion_and_errors() {
        let mut r = srs_select(5, budget(5), 1).unwrap().indices;
        r.sort_unstable();
        assert_eq!(r, vec![0, 1, 2, 3, 4]);
        assert!(srs_select(5, budget(6), 1).is_err());
    }

    #[test]
    fn srs_reproducible() {
        let a = srs_select(10000, budget(35), 2024).unwrap();
        let b = srs_select(10000, budget(35), 2024).unwrap();
        assert_eq!(a.indices, b.indices);
        assert_eq!(a.indices.len(), 35);
    }

    #[test]
    fn srs_uniform_frequencies() {
        let mut hits = [0usize; 4];
        for seed in 0..10000 {
            hits[srs_select(4, budget(1), seed).unwrap().indices[0]] += 1;
        }
        for h in hits {
            let f = h as f64 / 10000.0;
            assert!((f - 0.25).abs() <= 0.02, "frequency {f}");
        }
    }
}
