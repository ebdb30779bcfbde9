//! Sample selectors. None of them can see ground truth: every entry point
//! takes predictions or probabilities only.

mod deepgini;
mod discrimination;
mod sds;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use deepgini::{ddg_select, gini_impurity, gini_scores, rdg_select, GiniScores, GiniSource};
pub use discrimination::{
    compute_discrimination, discrimination_counts, group_size, majority_vote, partition_top_bottom,
    score_models, DiscriminationProfile, ModelScores, TopBottomPartition, VotedLabels,
    DEFAULT_GROUP_FRACTION,
};
pub use sds::{candidate_pool_size, sds_select, srs_select, SdsSelector, DEFAULT_CUTOFF};

use crate::context::{LabelSet, PredictionMatrix};
use crate::error::Error;
use crate::metrics::{Ranking, RankingSource};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sds,
    Srs,
    Ddg,
    Rdg,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Sds, Method::Srs, Method::Ddg, Method::Rdg];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Sds => "sds",
            Method::Srs => "srs",
            Method::Ddg => "ddg",
            Method::Rdg => "rdg",
        }
    }

    pub fn is_randomized(self) -> bool {
        self != Method::Ddg
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sds" => Ok(Method::Sds),
            "srs" => Ok(Method::Srs),
            "ddg" => Ok(Method::Ddg),
            "rdg" => Ok(Method::Rdg),
            other => Err(Error::invalid(format!(
                "unknown method {other:?} (expected sds, srs, ddg or rdg)"
            ))),
        }
    }
}

/// Chosen samples plus how they were chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Distinct sample indices in draw order.
    pub indices: Vec<usize>,
    pub method: Method,
    pub seed: Option<u64>,
    pub candidate_pool_size: usize,
}

/// Ranks models by agreement with the voted labels, using no labels at all.
pub fn vote_rank<T: Scalar>(matrix: &PredictionMatrix, labels: &LabelSet) -> Ranking<T> {
    let voted = majority_vote(matrix, labels);
    let scores = score_models(matrix, &voted);
    Ranking::from_scores(&scores.scores, RankingSource::Voted)
}
