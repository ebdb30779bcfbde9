//! Experiment orchestration: repeated seeded trials over a budget grid,
//! pairwise statistics against the reference method, and the follow-up
//! studies.

mod ablation;
mod config;
mod sweep;
pub mod synthetic;
mod trial;

pub use ablation::{
    interval_analysis, run_fewer_models, run_vote_rank_comparison, spread_models,
    sweep_selection_rate, voting_match_rate, BandComparison, BandReport, IntervalAnalysis,
    RateReport, VoteRankComparison, DEFAULT_RATES, QUARTILES,
};
pub use config::{ExperimentConfig, GiniAggregate, Pairing};
pub use sweep::{
    run_sweep, CellReport, Indicator, PairwiseComparison, TrialReport, WinTieLoss,
};
pub use synthetic::{Difficulty, ErrorLabels, SyntheticSpec};
pub use trial::{run_trial, PreparedDataset};

use crate::context::Dataset;
use crate::error::Result;
use crate::scalar::Scalar;

/// Builds the synthetic context described by `spec`.
pub fn generate_synthetic<T: Scalar>(spec: &SyntheticSpec) -> Result<Dataset<T>> {
    spec.generate()
}
