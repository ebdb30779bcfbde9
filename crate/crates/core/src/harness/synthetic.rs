//! Synthetic testing contexts: a population of classifiers with chosen
//! accuracies whose errors concentrate on a shared set of hard samples.
//!
//! Model `i` errs on sample `j` with probability `(1 - accuracy_i) * w`, where
//! `w` is a difficulty weight with mean 1 over the samples. With probability
//! `shared_difficulty` the weight is the sample's own weight `w_j`; otherwise
//! it is the weight of a uniformly drawn sample, independently per model. At
//! `shared_difficulty = 0` the models' errors are independent.

use serde::{Deserialize, Serialize};

use crate::context::{Dataset, GroundTruth, LabelSet, PredictionMatrix, ProbabilityTensor};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Difficulty {
    /// Every sample equally hard.
    Flat,
    /// `round(hard_fraction * m)` hard samples weighted `hard_weight`, the
    /// rest sharing the remaining weight so the mean stays 1.
    TwoPoint { hard_fraction: f64, hard_weight: f64 },
    /// Explicit per-sample weights, rescaled to mean 1.
    Weights { weights: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ErrorLabels {
    /// Wrong predictions spread uniformly over the other classes.
    Uniform,
    /// Each sample has a decoy class; a wrong prediction picks it with
    /// probability `concentration`, otherwise a uniform wrong class.
    Decoy { concentration: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub models: usize,
    pub samples: usize,
    pub classes: usize,
    /// Target accuracy per model, in `(0, 1]`.
    pub accuracies: Vec<f64>,
    pub difficulty: Difficulty,
    pub error_labels: ErrorLabels,
    /// Probability a model sees the common difficulty profile of a sample.
    pub shared_difficulty: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// `models` accuracies evenly spaced over `[low, high]`, with the default
    /// two-point difficulty (30% hard samples at weight 2.5), decoy errors at
    /// concentration 0.5 and a fully shared hard set.
    pub fn evenly_spaced(models: usize, samples: usize, classes: usize, low: f64, high: f64, seed: u64) -> Self {
        let accuracies = if models == 1 {
            vec![high]
        } else {
            (0..models)
                .map(|i| low + (high - low) * i as f64 / (models - 1) as f64)
                .collect()
        };
        Self {
            models,
            samples,
            classes,
            accuracies,
            difficulty: Difficulty::TwoPoint {
                hard_fraction: 0.3,
                hard_weight: 2.5,
            },
            error_labels: ErrorLabels::Decoy { concentration: 0.5 },
            shared_difficulty: 1.0,
            seed,
        }
    }

    fn check(&self) -> Result<()> {
        if self.models < 2 || self.samples == 0 || self.classes < 2 {
            return Err(Error::invalid(
                "synthetic context needs at least 2 models, 1 sample and 2 classes",
            ));
        }
        if self.accuracies.len() != self.models {
            return Err(Error::invalid(format!(
                "{} target accuracies for {} models",
                self.accuracies.len(),
                self.models
            )));
        }
        if let Some(a) = self.accuracies.iter().find(|&&a| !(a > 0.0 && a <= 1.0)) {
            return Err(Error::invalid(format!("target accuracy {a} outside (0, 1]")));
        }
        if !(0.0..=1.0).contains(&self.shared_difficulty) {
            return Err(Error::invalid("shared_difficulty must lie in [0, 1]"));
        }
        if let ErrorLabels::Decoy { concentration } = self.error_labels {
            if !(0.0..=1.0).contains(&concentration) {
                return Err(Error::invalid("decoy concentration must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    fn weights(&self, rng: &mut SeededRng) -> Result<Vec<f64>> {
        let m = self.samples;
        let raw = match &self.difficulty {
            Difficulty::Flat => vec![1.0; m],
            Difficulty::TwoPoint {
                hard_fraction,
                hard_weight,
            } => {
                if !(0.0..=1.0).contains(hard_fraction) || *hard_weight < 0.0 {
                    return Err(Error::invalid("two-point difficulty needs hard_fraction in [0, 1] and hard_weight >= 0"));
                }
                let hard = ((hard_fraction * m as f64).round() as usize).min(m);
                let hard_mass = hard as f64 * hard_weight;
                if hard_mass > m as f64 || (hard == m && hard_mass != m as f64) {
                    return Err(Error::Infeasible(format!(
                        "hard samples carry weight {hard_mass} but the total is {m}"
                    )));
                }
                let easy = if hard == m { 0.0 } else { (m as f64 - hard_mass) / (m - hard) as f64 };
                let mut w = vec![easy; m];
                let all: Vec<usize> = (0..m).collect();
                for j in rng.sample_distinct(&all, hard) {
                    w[j] = *hard_weight;
                }
                w
            }
            Difficulty::Weights { weights } => {
                if weights.len() != m || weights.iter().any(|&w| w.is_nan() || w < 0.0) {
                    return Err(Error::invalid("difficulty weights must be m non-negative values"));
                }
                weights.clone()
            }
        };
        let mean = raw.iter().sum::<f64>() / m as f64;
        if mean.is_nan() || mean <= 0.0 {
            return Err(Error::invalid("difficulty weights sum to zero"));
        }
        Ok(raw.into_iter().map(|w| w / mean).collect())
    }

    pub fn generate<T: Scalar>(&self) -> Result<Dataset<T>> {
        self.check()?;
        let (n, m, c) = (self.models, self.samples, self.classes);
        let mut rng = SeededRng::new(self.seed);
        let weights = self.weights(&mut rng)?;
        let max_w = weights.iter().copied().fold(0.0, f64::max);
        for (i, &a) in self.accuracies.iter().enumerate() {
            if (1.0 - a) * max_w > 1.0 + 1e-12 {
                return Err(Error::Infeasible(format!(
                    "model {i}: target accuracy {a} needs error probability {} on the hardest samples",
                    (1.0 - a) * max_w
                )));
            }
        }

        let truth: Vec<usize> = (0..m).map(|_| rng.below(c)).collect();
        let decoys: Vec<usize> = truth.iter().map(|&t| wrong_uniform(&mut rng, t, c)).collect();

        let mut rows = vec![vec![0usize; m]; n];
        let mut correct = vec![vec![false; m]; n];
        for i in 0..n {
            let base = 1.0 - self.accuracies[i];
            for j in 0..m {
                let w = if rng.bernoulli(self.shared_difficulty) {
                    weights[j]
                } else {
                    weights[rng.below(m)]
                };
                let wrong = rng.bernoulli(base * w);
                rows[i][j] = if wrong {
                    match self.error_labels {
                        ErrorLabels::Decoy { concentration } if rng.bernoulli(concentration) => decoys[j],
                        _ => wrong_uniform(&mut rng, truth[j], c),
                    }
                } else {
                    truth[j]
                };
                correct[i][j] = !wrong;
            }
        }

        let mut probs = Vec::with_capacity(n * m * c);
        for i in 0..n {
            for j in 0..m {
                probs.extend(probability_row::<T>(&mut rng, rows[i][j], correct[i][j], c));
            }
        }

        let labels = LabelSet::new(c)?;
        let model_ids = (1..=n).map(|i| format!("M{i}")).collect();
        let sample_ids = (1..=m).map(|j| format!("s{j}")).collect();
        let matrix = PredictionMatrix::new(rows, model_ids, sample_ids)?;
        let probs = ProbabilityTensor::new(probs, n, m, c)?;
        Dataset::new(labels, matrix, Some(GroundTruth::full(truth)), Some(probs))
    }
}

fn wrong_uniform(rng: &mut SeededRng, truth: usize, classes: usize) -> usize {
    let k = rng.below(classes - 1);
    if k >= truth {
        k + 1
    } else {
        k
    }
}

/// Probability row whose strict argmax is `predicted`. Correct predictions
/// carry confidence in `[0.7, 1)`, wrong ones in `[0.55, 0.85)`.
fn probability_row<T: Scalar>(rng: &mut SeededRng, predicted: usize, correct: bool, classes: usize) -> Vec<T> {
    let (lo, hi) = if correct { (0.7, 1.0) } else { (0.55, 0.85) };
    let top = lo + (hi - lo) * rng.uniform();
    let rest = 1.0 - top;
    let shares: Vec<f64> = (0..classes - 1).map(|_| rng.uniform() + 1e-3).collect();
    let total: f64 = shares.iter().sum();
    let mut row = Vec::with_capacity(classes);
    let mut others = shares.into_iter();
    for k in 0..classes {
        if k == predicted {
            row.push(T::of(top));
        } else {
            row.push(T::of(rest * others.next().unwrap_or(0.0) / total));
        }
    }
    row
}
