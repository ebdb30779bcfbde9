use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::selection::{Method, DEFAULT_CUTOFF, DEFAULT_GROUP_FRACTION};

/// How trial seeds relate across methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// Same (budget, repetition) gives every method the same seed.
    Paired,
    /// The method also enters the seed.
    Unpaired,
}

/// How the per-model impurity baselines are summarized into one outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GiniAggregate {
    /// Run once per model's probabilities and average the indicators.
    Mean,
    /// Keep the per-model run with the highest Spearman ρ.
    Best,
    /// Keep the per-model run with the lowest Spearman ρ.
    Worst,
    /// Run once on the impurity averaged over all models.
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub budgets: Vec<usize>,
    pub repetitions: usize,
    pub methods: Vec<Method>,
    pub jaccard_ks: Vec<usize>,
    pub cutoff: f64,
    pub fraction: f64,
    pub base_seed: u64,
    pub pairing: Pairing,
    pub gini: GiniAggregate,
    /// Method every other method is compared against.
    pub reference: Method,
    /// Record wall-clock time per method. Off by default so reports are
    /// byte-reproducible.
    #[serde(default)]
    pub timings: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            budgets: (35..=180).step_by(5).collect(),
            repetitions: 50,
            methods: Method::ALL.to_vec(),
            jaccard_ks: vec![1, 3, 5, 10],
            cutoff: DEFAULT_CUTOFF,
            fraction: DEFAULT_GROUP_FRACTION,
            base_seed: 0,
            pairing: Pairing::Paired,
            gini: GiniAggregate::Mean,
            reference: Method::Sds,
            timings: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budgets.is_empty() {
            return Err(Error::invalid("no budgets configured"));
        }
        if self.budgets[0] == 0 || self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("budgets must be positive and strictly increasing"));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("no methods configured"));
        }
        let mut sorted = self.methods.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.methods.len() {
            return Err(Error::invalid("methods listed more than once"));
        }
        if self.jaccard_ks.contains(&0) {
            return Err(Error::invalid("Jaccard k must be at least 1"));
        }
        if !(self.cutoff > 0.0 && self.cutoff <= 1.0) {
            return Err(Error::invalid(format!("cutoff must lie in (0, 1], got {}", self.cutoff)));
        }
        if !(self.fraction > 0.0 && self.fraction <= 0.5) {
            return Err(Error::invalid(format!(
                "group fraction must lie in (0, 0.5], got {}",
                self.fraction
            )));
        }
        Ok(())
    }

    /// Seed for one (method, budget, repetition) cell.
    pub fn trial_seed(&self, method: Method, budget: usize, repetition: usize) -> u64 {
        match self.pairing {
            Pairing::Paired => derive_seed(self.base_seed, &[budget as u64, repetition as u64]),
            Pairing::Unpaired => derive_seed(
                self.base_seed,
                &[method as u64 + 1, budget as u64, repetition as u64],
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let c = ExperimentConfig::default();
        assert_eq!(c.budgets.len(), 30);
        assert_eq!(c.budgets[0], 35);
        assert_eq!(*c.budgets.last().unwrap(), 180);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = ExperimentConfig {
            budgets: vec![40, 35],
            ..Default::default()
        };
        assert!(c.validate().is_err());
        c.budgets = vec![35];
        c.repetitions = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn pairing_controls_method_dependence() {
        let mut c = ExperimentConfig::default();
        assert_eq!(c.trial_seed(Method::Sds, 35, 3), c.trial_seed(Method::Srs, 35, 3));
        c.pairing = Pairing::Unpaired;
        assert_ne!(c.trial_seed(Method::Sds, 35, 3), c.trial_seed(Method::Srs, 35, 3));
        assert_eq!(c.trial_seed(Method::Sds, 35, 3), c.trial_seed(Method::Sds, 35, 3));
    }
}
