//! One trial: select, reveal the selected labels, compare the estimated
//! ranking with the full-context ranking.

use std::collections::BTreeMap;

use crate::context::{Budget, Dataset, GroundTruth};
use crate::error::{Error, Result};
use crate::metrics::{jaccard_topk, rank_by_accuracy, ranking_spearman, Ranking, RankingOutcome, RankingSource};
use crate::scalar::Scalar;
use crate::selection::{
    ddg_select, gini_scores, rdg_select, srs_select, GiniScores, GiniSource, Method, SdsSelector,
};

use super::config::{ExperimentConfig, GiniAggregate};

/// Per-dataset work shared by every trial: the actual ranking, the
/// discrimination order and the impurity scores.
pub struct PreparedDataset<'a, T> {
    dataset: &'a Dataset<T>,
    truth: &'a GroundTruth,
    all_samples: Vec<usize>,
    actual: Ranking<T>,
    sds: SdsSelector<T>,
    gini: Option<Vec<GiniScores<T>>>,
    pooled_gini: Option<GiniScores<T>>,
}

impl<'a, T: Scalar> PreparedDataset<'a, T> {
    pub fn new(dataset: &'a Dataset<T>, fraction: f64) -> Result<Self> {
        let truth = dataset.truth()?;
        if !truth.is_complete() {
            return Err(Error::invalid(
                "evaluation needs ground truth for every sample of the testing context",
            ));
        }
        let matrix = &dataset.matrix;
        let all_samples: Vec<usize> = (0..matrix.sample_count()).collect();
        let actual = rank_by_accuracy(matrix, truth, &all_samples, RankingSource::Actual)?;
        let sds = SdsSelector::new(matrix, &dataset.labels, fraction)?;
        let (gini, pooled_gini) = match dataset.probs.as_ref() {
            Some(p) => (
                Some(
                    (0..matrix.model_count())
                        .map(|i| gini_scores(Some(p), GiniSource::Model(i)))
                        .collect::<Result<Vec<_>>>()?,
                ),
                Some(gini_scores(Some(p), GiniSource::Pooled)?),
            ),
            None => (None, None),
        };
        Ok(Self {
            dataset,
            truth,
            all_samples,
            actual,
            sds,
            gini,
            pooled_gini,
        })
    }

    pub fn dataset(&self) -> &Dataset<T> {
        self.dataset
    }

    pub fn actual(&self) -> &Ranking<T> {
        &self.actual
    }

    pub fn sds(&self) -> &SdsSelector<T> {
        &self.sds
    }

    pub fn sample_count(&self) -> usize {
        self.all_samples.len()
    }

    /// Ranks models on the revealed labels of `indices` and scores the
    /// estimate against the actual ranking.
    pub fn evaluate(
        &self,
        indices: &[usize],
        method: Method,
        ks: &[usize],
    ) -> Result<RankingOutcome<T>> {
        let labeled = self.truth.reveal(indices);
        let estimated = rank_by_accuracy(&self.dataset.matrix, &labeled, indices, RankingSource::Estimated)?;
        let spearman = ranking_spearman(&estimated, &self.actual)?;
        let jaccard = self.jaccard(&estimated, ks)?;
        Ok(RankingOutcome {
            spearman,
            jaccard,
            estimated,
            actual: self.actual.clone(),
            budget: indices.len(),
            method,
        })
    }

    fn jaccard(&self, estimated: &Ranking<T>, ks: &[usize]) -> Result<BTreeMap<usize, T>> {
        let n = self.actual.len();
        ks.iter()
            .filter(|&&k| k <= n)
            .map(|&k| Ok((k, jaccard_topk(estimated, &self.actual, k)?)))
            .collect()
    }

    fn gini_sources(&self) -> Result<&[GiniScores<T>]> {
        self.gini.as_deref().ok_or(Error::MissingProbabilities)
    }

    /// Runs `method` once. The impurity baselines are summarized across
    /// models according to `config.gini`.
    pub fn run_trial(
        &self,
        method: Method,
        budget: Budget,
        seed: u64,
        config: &ExperimentConfig,
    ) -> Result<RankingOutcome<T>> {
        self.run_trial_with_cutoff(method, budget, seed, config.cutoff, config)
    }

    pub fn run_trial_with_cutoff(
        &self,
        method: Method,
        budget: Budget,
        seed: u64,
        cutoff: f64,
        config: &ExperimentConfig,
    ) -> Result<RankingOutcome<T>> {
        let ks = &config.jaccard_ks;
        match method {
            Method::Sds => {
                let sel = self.sds.select(budget, cutoff, seed)?;
                self.evaluate(&sel.indices, method, ks)
            }
            Method::Srs => {
                let sel = srs_select(self.sample_count(), budget, seed)?;
                self.evaluate(&sel.indices, method, ks)
            }
            Method::Ddg | Method::Rdg => {
                let select = |g: &GiniScores<T>| -> Result<Vec<usize>> {
                    Ok(match method {
                        Method::Ddg => ddg_select(g, budget)?.indices,
                        _ => rdg_select(g, budget, cutoff, seed)?.indices,
                    })
                };
                if config.gini == GiniAggregate::Pooled {
                    let g = self.pooled_gini.as_ref().ok_or(Error::MissingProbabilities)?;
                    return self.evaluate(&select(g)?, method, ks);
                }
                let outcomes = self
                    .gini_sources()?
                    .iter()
                    .map(|g| self.evaluate(&select(g)?, method, ks))
                    .collect::<Result<Vec<_>>>()?;
                Ok(summarize(outcomes, config.gini))
            }
        }
    }

    /// Uniform draw of `budget` samples from positions `start..end` of the
    /// discrimination order.
    pub fn run_band_trial(
        &self,
        start: usize,
        end: usize,
        budget: Budget,
        seed: u64,
        ks: &[usize],
    ) -> Result<RankingOutcome<T>> {
        let band = &self.sds.order()[start..end];
        if budget.effort() > band.len() {
            return Err(Error::BudgetExceedsPool {
                budget: budget.effort(),
                pool: band.len(),
            });
        }
        let indices = crate::rng::SeededRng::new(seed).sample_distinct(band, budget.effort());
        self.evaluate(&indices, Method::Sds, ks)
    }
}

fn summarize<T: Scalar>(mut outcomes: Vec<RankingOutcome<T>>, how: GiniAggregate) -> RankingOutcome<T> {
    let by_rho = |a: &RankingOutcome<T>, b: &RankingOutcome<T>| {
        a.spearman
            .partial_cmp(&b.spearman)
            .unwrap_or(std::cmp::Ordering::Equal)
    };
    match how {
        // first maximum / first minimum, so ties keep the lower model index
        GiniAggregate::Best => {
            let mut best = 0;
            for i in 1..outcomes.len() {
                if by_rho(&outcomes[i], &outcomes[best]).is_gt() {
                    best = i;
                }
            }
            outcomes.swap_remove(best)
        }
        GiniAggregate::Worst => {
            let mut worst = 0;
            for i in 1..outcomes.len() {
                if by_rho(&outcomes[i], &outcomes[worst]).is_lt() {
                    worst = i;
                }
            }
            outcomes.swap_remove(worst)
        }
        GiniAggregate::Mean | GiniAggregate::Pooled => {
            let count = T::of_usize(outcomes.len());
            let n = outcomes[0].estimated.len();
            let spearman = outcomes.iter().map(|o| o.spearman).sum::<T>() / count;
            let mut jaccard = BTreeMap::new();
            for &k in outcomes[0].jaccard.keys() {
                jaccard.insert(k, outcomes.iter().map(|o| o.jaccard[&k]).sum::<T>() / count);
            }
            // consensus ranking: models ordered by their mean estimated rank
            let neg_mean_rank: Vec<T> = (0..n)
                .map(|i| -outcomes.iter().map(|o| o.estimated.ranks[i]).sum::<T>() / count)
                .collect();
            let first = outcomes.swap_remove(0);
            RankingOutcome {
                spearman,
                jaccard,
                estimated: Ranking::from_scores(&neg_mean_rank, RankingSource::Estimated),
                actual: first.actual,
                budget: first.budget,
                method: first.method,
            }
        }
    }
}

/// One-shot trial on an unprepared dataset.
pub fn run_trial<T: Scalar>(
    dataset: &Dataset<T>,
    method: Method,
    budget: Budget,
    seed: u64,
    config: &ExperimentConfig,
) -> Result<RankingOutcome<T>> {
    PreparedDataset::new(dataset, config.fraction)?.run_trial(method, budget, seed, config)
}
