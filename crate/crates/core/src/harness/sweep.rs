use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::{Budget, Dataset};
use crate::error::{Error, Result};
use crate::metrics::RankingOutcome;
use crate::scalar::Scalar;
use crate::selection::Method;
use crate::stats::{wtl_compare, ComparisonStats, Verdict};

use super::config::ExperimentConfig;
use super::trial::PreparedDataset;

/// Indicator a comparison is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Indicator {
    Spearman,
    Jaccard(usize),
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Indicator::Spearman => f.write_str("spearman"),
            Indicator::Jaccard(k) => write!(f, "jaccard@{k}"),
        }
    }
}

/// All repetitions of one (method, budget) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport<T> {
    pub method: Method,
    pub budget: usize,
    pub outcomes: Vec<RankingOutcome<T>>,
    pub mean_spearman: T,
    pub mean_jaccard: BTreeMap<usize, T>,
}

impl<T: Scalar> CellReport<T> {
    pub fn new(method: Method, budget: usize, outcomes: Vec<RankingOutcome<T>>) -> Self {
        let mean_spearman = mean(outcomes.iter().map(|o| o.spearman));
        let mut mean_jaccard = BTreeMap::new();
        if let Some(first) = outcomes.first() {
            for &k in first.jaccard.keys() {
                mean_jaccard.insert(k, mean(outcomes.iter().map(|o| o.jaccard[&k])));
            }
        }
        Self {
            method,
            budget,
            outcomes,
            mean_spearman,
            mean_jaccard,
        }
    }

    pub fn values(&self, indicator: Indicator) -> Vec<T> {
        self.outcomes
            .iter()
            .map(|o| match indicator {
                Indicator::Spearman => o.spearman,
                Indicator::Jaccard(k) => o.jaccard[&k],
            })
            .collect()
    }

    pub fn mean(&self, indicator: Indicator) -> Option<T> {
        match indicator {
            Indicator::Spearman => Some(self.mean_spearman),
            Indicator::Jaccard(k) => self.mean_jaccard.get(&k).copied(),
        }
    }
}

pub(crate) fn mean<T: Scalar>(values: impl Iterator<Item = T>) -> T {
    let (sum, count) = values.fold((T::zero(), 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        T::nan()
    } else {
        sum / T::of_usize(count)
    }
}

/// Reference method against one baseline. `budget` is `None` for the
/// comparison pooled over every budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison<T> {
    pub reference: Method,
    pub baseline: Method,
    pub indicator: Indicator,
    pub budget: Option<usize>,
    pub stats: ComparisonStats<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WinTieLoss {
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

impl fmt::Display for WinTieLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.wins, self.ties, self.losses)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport<T> {
    pub config: ExperimentConfig,
    /// Method-major, budgets ascending.
    pub cells: Vec<CellReport<T>>,
    pub comparisons: Vec<PairwiseComparison<T>>,
    /// Summed trial wall-clock seconds per method, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<Method, f64>>,
}

impl<T: Scalar> TrialReport<T> {
    pub fn cell(&self, method: Method, budget: usize) -> Option<&CellReport<T>> {
        self.cells.iter().find(|c| c.method == method && c.budget == budget)
    }

    pub fn methods(&self) -> Vec<Method> {
        let mut out: Vec<Method> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.method) {
                out.push(c.method);
            }
        }
        out
    }

    pub fn budgets(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.cells.iter().map(|c| c.budget).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Indicators present in every cell.
    pub fn indicators(&self) -> Vec<Indicator> {
        let mut out = vec![Indicator::Spearman];
        if let Some(first) = self.cells.first() {
            out.extend(first.mean_jaccard.keys().map(|&k| Indicator::Jaccard(k)));
        }
        out
    }

    pub fn comparison(
        &self,
        baseline: Method,
        indicator: Indicator,
        budget: Option<usize>,
    ) -> Option<&PairwiseComparison<T>> {
        self.comparisons
            .iter()
            .find(|c| c.baseline == baseline && c.indicator == indicator && c.budget == budget)
    }

    /// Per-budget verdict tally of the reference against `baseline`.
    pub fn win_tie_loss(&self, baseline: Method, indicator: Indicator) -> WinTieLoss {
        let mut wtl = WinTieLoss::default();
        for c in self
            .comparisons
            .iter()
            .filter(|c| c.baseline == baseline && c.indicator == indicator && c.budget.is_some())
        {
            match c.stats.verdict {
                Verdict::W => wtl.wins += 1,
                Verdict::T => wtl.ties += 1,
                Verdict::L => wtl.losses += 1,
            }
        }
        wtl
    }

    /// Mean of the per-budget means of `method`.
    pub fn average(&self, method: Method, indicator: Indicator) -> Option<T> {
        let means: Vec<T> = self
            .cells
            .iter()
            .filter(|c| c.method == method)
            .filter_map(|c| c.mean(indicator))
            .collect();
        if means.is_empty() {
            None
        } else {
            Some(mean(means.into_iter()))
        }
    }
}

/// Reference-vs-baseline statistics per budget and pooled over budgets.
pub(crate) fn compare_cells<T: Scalar>(
    cells: &[CellReport<T>],
    reference: Method,
    budgets: &[usize],
    indicators: &[Indicator],
) -> Result<Vec<PairwiseComparison<T>>> {
    let find = |m: Method, b: usize| cells.iter().find(|c| c.method == m && c.budget == b);
    let mut baselines: Vec<Method> = Vec::new();
    for c in cells {
        if c.method != reference && !baselines.contains(&c.method) {
            baselines.push(c.method);
        }
    }
    if find(reference, budgets[0]).is_none() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for &baseline in &baselines {
        for &indicator in indicators {
            let mut pooled_ref = Vec::new();
            let mut pooled_base = Vec::new();
            for &b in budgets {
                let (Some(r), Some(x)) = (find(reference, b), find(baseline, b)) else {
                    continue;
                };
                let (rv, xv) = (r.values(indicator), x.values(indicator));
                out.push(PairwiseComparison {
                    reference,
                    baseline,
                    indicator,
                    budget: Some(b),
                    stats: wtl_compare(&rv, &xv)?,
                });
                pooled_ref.extend(rv);
                pooled_base.extend(xv);
            }
            out.push(PairwiseComparison {
                reference,
                baseline,
                indicator,
                budget: None,
                stats: wtl_compare(&pooled_ref, &pooled_base)?,
            });
        }
    }
    Ok(out)
}

pub(crate) fn indicators_for(config: &ExperimentConfig, models: usize) -> Vec<Indicator> {
    let mut out = vec![Indicator::Spearman];
    out.extend(
        config
            .jaccard_ks
            .iter()
            .filter(|&&k| k <= models)
            .map(|&k| Indicator::Jaccard(k)),
    );
    out
}

/// Every (method, budget, repetition) cell of `config`, trials in parallel.
pub fn run_sweep<T: Scalar>(dataset: &Dataset<T>, config: &ExperimentConfig) -> Result<TrialReport<T>> {
    config.validate()?;
    let prepared = PreparedDataset::new(dataset, config.fraction)?;
    run_prepared_sweep(&prepared, config, config.cutoff)
}

pub(crate) fn run_prepared_sweep<T: Scalar>(
    prepared: &PreparedDataset<'_, T>,
    config: &ExperimentConfig,
    cutoff: f64,
) -> Result<TrialReport<T>> {
    config.validate()?;
    let mut tasks = Vec::new();
    for &method in &config.methods {
        for &budget in &config.budgets {
            // the deterministic baseline runs once and is replicated
            let reps = if method.is_randomized() { config.repetitions } else { 1 };
            for rep in 0..reps {
                tasks.push((method, budget, rep));
            }
        }
    }

    let results: Vec<Result<(RankingOutcome<T>, f64)>> = tasks
        .par_iter()
        .map(|&(method, budget, rep)| {
            let start = Instant::now();
            let seed = config.trial_seed(method, budget, rep);
            let outcome = Budget::new(budget)
                .and_then(|b| prepared.run_trial_with_cutoff(method, b, seed, cutoff, config))
                .map_err(|e| Error::Trial {
                    method: method.to_string(),
                    budget,
                    repetition: rep,
                    source: Box::new(e),
                })?;
            Ok((outcome, start.elapsed().as_secs_f64()))
        })
        .collect();

    let mut timings: BTreeMap<Method, f64> = BTreeMap::new();
    let mut grouped: BTreeMap<(usize, usize), Vec<RankingOutcome<T>>> = BTreeMap::new();
    let method_pos = |m: Method| config.methods.iter().position(|&x| x == m).unwrap_or(0);
    for (&(method, budget, _), result) in tasks.iter().zip(results) {
        let (outcome, secs) = result?;
        *timings.entry(method).or_default() += secs;
        grouped.entry((method_pos(method), budget)).or_default().push(outcome);
    }

    let cells: Vec<CellReport<T>> = grouped
        .into_iter()
        .map(|((pos, budget), mut outcomes)| {
            let method = config.methods[pos];
            if !method.is_randomized() {
                let first = outcomes[0].clone();
                outcomes.resize(config.repetitions, first);
            }
            CellReport::new(method, budget, outcomes)
        })
        .collect();

    let indicators = indicators_for(config, prepared.actual().len());
    let comparisons = compare_cells(&cells, config.reference, &config.budgets, &indicators)?;
    Ok(TrialReport {
        config: config.clone(),
        cells,
        comparisons,
        timings: config.timings.then_some(timings),
    })
}
