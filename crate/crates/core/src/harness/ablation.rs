//! Follow-up studies around the main sweep: candidate-pool rate, which band
//! of the discrimination order is sampled, the label-free vote ranking, and
//! smaller model populations.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::{Budget, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{jaccard_topk, matched_rate, ranking_spearman, MatchedRate, Ranking};
use crate::scalar::Scalar;
use crate::selection::{candidate_pool_size, majority_vote, vote_rank, Method};
use crate::stats::{wtl_compare, ComparisonStats};

use super::config::ExperimentConfig;
use super::sweep::{run_prepared_sweep, CellReport, TrialReport};
use super::trial::PreparedDataset;

pub const DEFAULT_RATES: [f64; 5] = [0.15, 0.20, 0.25, 0.30, 0.35];
pub const QUARTILES: [(f64, f64); 4] = [(0.0, 0.25), (0.25, 0.5), (0.5, 0.75), (0.75, 1.0)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport<T> {
    pub rate: f64,
    pub report: TrialReport<T>,
}

/// Runs SDS once per candidate-pool rate with the same trial seeds.
pub fn sweep_selection_rate<T: Scalar>(
    dataset: &Dataset<T>,
    rates: &[f64],
    config: &ExperimentConfig,
) -> Result<Vec<RateReport<T>>> {
    config.validate()?;
    if rates.is_empty() {
        return Err(Error::invalid("no selection rates given"));
    }
    if let Some(r) = rates.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::invalid(format!("selection rate {r} outside (0, 1]")));
    }
    let m = dataset.matrix.sample_count();
    let smallest = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let pool = candidate_pool_size(m, smallest);
    let largest_budget = *config.budgets.last().expect("validated");
    if largest_budget > pool {
        return Err(Error::BudgetExceedsPool {
            budget: largest_budget,
            pool,
        });
    }
    let prepared = PreparedDataset::new(dataset, config.fraction)?;
    let sds_only = ExperimentConfig {
        methods: vec![Method::Sds],
        ..config.clone()
    };
    rates
        .iter()
        .map(|&rate| {
            let cfg = ExperimentConfig {
                cutoff: rate,
                ..sds_only.clone()
            };
            Ok(RateReport {
                rate,
                report: run_prepared_sweep(&prepared, &cfg, rate)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport<T> {
    /// Band as fractions of the discrimination order, `[lower, upper)`.
    pub lower: f64,
    pub upper: f64,
    pub start: usize,
    pub end: usize,
    pub report: TrialReport<T>,
}

/// First band against every other band on Spearman ρ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandComparison<T> {
    pub band: usize,
    pub budget: Option<usize>,
    pub stats: ComparisonStats<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalAnalysis<T> {
    pub bands: Vec<BandReport<T>>,
    pub comparisons: Vec<BandComparison<T>>,
}

/// Sorts samples by discrimination once and samples each budget uniformly
/// within every band. Band `[lo, hi)` covers positions `ceil(lo·m)..ceil(hi·m)`.
pub fn interval_analysis<T: Scalar>(
    dataset: &Dataset<T>,
    bands: &[(f64, f64)],
    config: &ExperimentConfig,
) -> Result<IntervalAnalysis<T>> {
    config.validate()?;
    let m = dataset.matrix.sample_count();
    let position = |f: f64| ((f * m as f64 - 1e-9).ceil().max(0.0) as usize).min(m);
    let spans: Vec<(f64, f64, usize, usize)> = bands
        .iter()
        .map(|&(lo, hi)| {
            if !(0.0..1.0).contains(&lo) || !(hi > lo && hi <= 1.0) {
                return Err(Error::invalid(format!("invalid band [{lo}, {hi})")));
            }
            Ok((lo, hi, position(lo), position(hi)))
        })
        .collect::<Result<_>>()?;
    let largest_budget = *config.budgets.last().expect("validated");
    if let Some(&(_, _, s, e)) = spans.iter().find(|&&(_, _, s, e)| e - s < largest_budget) {
        return Err(Error::BudgetExceedsPool {
            budget: largest_budget,
            pool: e - s,
        });
    }

    let prepared = PreparedDataset::new(dataset, config.fraction)?;
    let mut reports = Vec::with_capacity(spans.len());
    for &(lower, upper, start, end) in &spans {
        let tasks: Vec<(usize, usize)> = config
            .budgets
            .iter()
            .flat_map(|&b| (0..config.repetitions).map(move |r| (b, r)))
            .collect();
        let outcomes = tasks
            .par_iter()
            .map(|&(budget, rep)| {
                let seed = config.trial_seed(Method::Sds, budget, rep);
                Budget::new(budget)
                    .and_then(|b| prepared.run_band_trial(start, end, b, seed, &config.jaccard_ks))
                    .map_err(|e| Error::Trial {
                        method: format!("band [{lower}, {upper})"),
                        budget,
                        repetition: rep,
                        source: Box::new(e),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let cells = config
            .budgets
            .iter()
            .zip(outcomes.chunks(config.repetitions))
            .map(|(&b, chunk)| CellReport::new(Method::Sds, b, chunk.to_vec()))
            .collect();
        reports.push(BandReport {
            lower,
            upper,
            start,
            end,
            report: TrialReport {
                config: ExperimentConfig {
                    methods: vec![Method::Sds],
                    ..config.clone()
                },
                cells,
                comparisons: Vec::new(),
                timings: None,
            },
        });
    }

    let mut comparisons = Vec::new();
    if let Some((first, rest)) = reports.split_first() {
        for (offset, other) in rest.iter().enumerate() {
            let mut pooled = (Vec::new(), Vec::new());
            for (a, b) in first.report.cells.iter().zip(&other.report.cells) {
                let (x, y) = (
                    a.values(super::Indicator::Spearman),
                    b.values(super::Indicator::Spearman),
                );
                comparisons.push(BandComparison {
                    band: offset + 1,
                    budget: Some(a.budget),
                    stats: wtl_compare(&x, &y)?,
                });
                pooled.0.extend(x);
                pooled.1.extend(y);
            }
            comparisons.push(BandComparison {
                band: offset + 1,
                budget: None,
                stats: wtl_compare(&pooled.0, &pooled.1)?,
            });
        }
    }
    Ok(IntervalAnalysis {
        bands: reports,
        comparisons,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteRankComparison<T> {
    pub vote_ranking: Ranking<T>,
    pub vote_spearman: T,
    pub vote_jaccard: BTreeMap<usize, T>,
    pub sds: TrialReport<T>,
    /// Smallest budget whose mean SDS ρ exceeds the vote ranking's ρ.
    pub crossing_budget: Option<usize>,
}

/// Label-free vote ranking against the SDS budget curve.
pub fn run_vote_rank_comparison<T: Scalar>(
    dataset: &Dataset<T>,
    config: &ExperimentConfig,
) -> Result<VoteRankComparison<T>> {
    config.validate()?;
    let prepared = PreparedDataset::new(dataset, config.fraction)?;
    let mut vote_ranking = vote_rank::<T>(&dataset.matrix, &dataset.labels);
    vote_ranking.source = crate::metrics::RankingSource::Voted;
    let vote_spearman = ranking_spearman(&vote_ranking, prepared.actual())?;
    let vote_jaccard = config
        .jaccard_ks
        .iter()
        .filter(|&&k| k <= vote_ranking.len())
        .map(|&k| Ok((k, jaccard_topk(&vote_ranking, prepared.actual(), k)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let cfg = ExperimentConfig {
        methods: vec![Method::Sds],
        ..config.clone()
    };
    let sds = run_prepared_sweep(&prepared, &cfg, cfg.cutoff)?;
    let crossing_budget = sds
        .cells
        .iter()
        .find(|c| c.mean_spearman > vote_spearman)
        .map(|c| c.budget);
    Ok(VoteRankComparison {
        vote_ranking,
        vote_spearman,
        vote_jaccard,
        sds,
        crossing_budget,
    })
}

/// Sweep restricted to a subset of the models.
pub fn run_fewer_models<T: Scalar>(
    dataset: &Dataset<T>,
    models: &[usize],
    config: &ExperimentConfig,
) -> Result<TrialReport<T>> {
    if models.len() < 2 {
        return Err(Error::invalid("the fewer-models study needs at least 2 models"));
    }
    let subset = dataset.select_models(models)?;
    super::run_sweep(&subset, config)
}

/// `count` model indices spread evenly over the models ordered by actual
/// accuracy, best first.
pub fn spread_models<T: Scalar>(dataset: &Dataset<T>, count: usize) -> Result<Vec<usize>> {
    let n = dataset.matrix.model_count();
    if count < 2 || count > n {
        return Err(Error::invalid(format!("cannot pick {count} of {n} models")));
    }
    let truth = dataset.truth()?;
    let all: Vec<usize> = (0..dataset.matrix.sample_count()).collect();
    let acc = crate::metrics::accuracies(&dataset.matrix, truth, &all)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| acc[b].cmp(&acc[a]).then(a.cmp(&b)));
    Ok((0..count)
        .map(|k| order[k * (n - 1) / (count - 1)])
        .collect())
}

/// How often the voted label equals the actual label.
pub fn voting_match_rate<T: Scalar>(dataset: &Dataset<T>) -> Result<MatchedRate<T>> {
    let voted = majority_vote(&dataset.matrix, &dataset.labels);
    matched_rate(&voted, dataset.truth()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synthetic::SyntheticSpec;

    fn small() -> Dataset<f64> {
        SyntheticSpec::evenly_spaced(10, 800, 4, 0.6, 0.95, 3).generate().unwrap()
    }

    fn cfg() -> ExperimentConfig {
        ExperimentConfig {
            budgets: vec![40],
            repetitions: 5,
            ..Default::default()
        }
    }

    #[test]
    fn single_rate_equals_sds_sweep() {
        let ds = small();
        let rates = sweep_selection_rate(&ds, &[0.25], &cfg()).unwrap();
        let direct = super::super::run_sweep(
            &ds,
            &ExperimentConfig {
                methods: vec![Method::Sds],
                ..cfg()
            },
        )
        .unwrap();
        assert_eq!(rates[0].report.cells, direct.cells);
    }

    #[test]
    fn rate_budget_checked_up_front() {
        let ds = small();
        let c = ExperimentConfig {
            budgets: vec![150],
            ..cfg()
        };
        assert!(matches!(
            sweep_selection_rate(&ds, &[0.15, 0.35], &c),
            Err(Error::BudgetExceedsPool { budget: 150, pool: 120 })
        ));
    }

    #[test]
    fn quartile_bands() {
        let ds = small();
        let a = interval_analysis(&ds, &QUARTILES, &cfg()).unwrap();
        assert_eq!(a.bands.len(), 4);
        assert_eq!((a.bands[0].start, a.bands[0].end), (0, 200));
        assert_eq!((a.bands[3].start, a.bands[3].end), (600, 800));
        assert_eq!(a.comparisons.len(), 3 * 2);
    }

    #[test]
    fn vote_rank_is_budget_independent() {
        let ds = small();
        let c = ExperimentConfig {
            budgets: vec![30, 60],
            repetitions: 1,
            ..Default::default()
        };
        let v = run_vote_rank_comparison(&ds, &c).unwrap();
        assert_eq!(v.sds.cells.len(), 2);
        assert!(v.vote_spearman <= 1.0);
    }

    #[test]
    fn perfect_votes_give_perfect_vote_rank() {
        use crate::context::{GroundTruth, LabelSet, PredictionMatrix};
        let truth = vec![0, 1, 2, 0, 1, 2, 0, 1];
        let rows = vec![
            truth.clone(),
            vec![0, 1, 2, 0, 1, 2, 0, 0],
            vec![0, 1, 2, 0, 1, 0, 0, 1],
            vec![0, 1, 1, 0, 0, 2, 0, 1],
        ];
        let ds = Dataset::<f64>::new(
            LabelSet::new(3).unwrap(),
            PredictionMatrix::from_rows(rows).unwrap(),
            Some(GroundTruth::full(truth)),
            None,
        )
        .unwrap();
        let c = ExperimentConfig {
            budgets: vec![2],
            repetitions: 1,
            methods: vec![Method::Sds],
            jaccard_ks: vec![1],
            ..Default::default()
        };
        let v = run_vote_rank_comparison(&ds, &c).unwrap();
        assert_eq!(v.vote_spearman, 1.0);
        assert_eq!(voting_match_rate(&ds).unwrap().overall, 1.0);
    }

    #[test]
    fn fewer_models_skips_large_k() {
        let ds = small();
        let models = spread_models(&ds, 4).unwrap();
        assert_eq!(models.len(), 4);
        let r = run_fewer_models(&ds, &models, &cfg()).unwrap();
        assert!(r.cells.iter().all(|c| c.mean_jaccard.keys().all(|&k| k <= 4)));
    }
}
