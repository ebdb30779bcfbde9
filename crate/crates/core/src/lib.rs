//! Ranking several classifiers from a small labeled subset.
//!
//! Given the predictions of `n` models over `m` unlabeled samples, the
//! discrimination-based selector (SDS) estimates labels by plurality vote,
//! splits models into top and bottom groups by agreement with the vote, and
//! scores each sample by how many more top models than bottom models agree
//! with it. Labeling a random draw from the most discriminating quarter of the
//! samples ranks the models better than labeling a uniform draw.
//!
//! Numeric routines are generic over [`Scalar`] (`f32` or `f64`); accuracies
//! are exact rationals. The aliases below fix the scalar to `f64`.

pub mod context;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod rng;
pub mod scalar;
pub mod selection;
pub mod stats;

pub use context::{
    accuracy, validate_context, Accuracy, Budget, Dataset, GroundTruth, LabelSet, PredictionMatrix,
    ProbabilityTensor, ValidationReport,
};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use selection::{Method, SelectionResult};

pub type Dataset64 = context::Dataset<f64>;
pub type Probabilities64 = context::ProbabilityTensor<f64>;
pub type Ranking64 = metrics::Ranking<f64>;
pub type RankingOutcome64 = metrics::RankingOutcome<f64>;
pub type DiscriminationProfile64 = selection::DiscriminationProfile<f64>;
pub type GiniScores64 = selection::GiniScores<f64>;
pub type ComparisonStats64 = stats::ComparisonStats<f64>;

pub type TrialReport64 = harness::TrialReport<f64>;
