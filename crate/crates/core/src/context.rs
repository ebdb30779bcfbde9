//! Domain types for a testing context: the prediction matrix of `n` models over
//! `m` unlabeled samples, optional ground truth and class probabilities, and the
//! accuracy primitive every ranking is built on.

use std::collections::HashSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exact accuracy `correct / total`. Comparisons between accuracies are exact.
pub type Accuracy = Ratio<usize>;

/// Tolerance on probability-row sums.
pub const PROBABILITY_TOLERANCE: f64 = 1e-6;

/// Dense class set `0..class_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    class_count: usize,
}

impl LabelSet {
    pub fn new(class_count: usize) -> Result<Self> {
        if class_count < 2 {
            return Err(Error::invalid(format!(
                "label set needs at least 2 classes, got {class_count}"
            )));
        }
        Ok(Self { class_count })
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn contains(&self, class: usize) -> bool {
        class < self.class_count
    }
}

/// Row-major `n × m` grid of predicted class indices; row `i` is model `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionMatrix {
    entries: Vec<usize>,
    model_ids: Vec<String>,
    sample_ids: Vec<String>,
}

impl PredictionMatrix {
    /// Builds a matrix from one prediction row per model. Shape and id
    /// uniqueness are checked here; label ranges are checked by
    /// [`validate_context`].
    pub fn new(rows: Vec<Vec<usize>>, model_ids: Vec<String>, sample_ids: Vec<String>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 models, got {n}")));
        }
        let m = sample_ids.len();
        if m == 0 {
            return Err(Error::invalid("need at least 1 sample"));
        }
        if model_ids.len() != n {
            return Err(Error::invalid(format!(
                "{} model ids for {n} prediction rows",
                model_ids.len()
            )));
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(Error::invalid(format!(
                "model {} has {} predictions, expected {m}",
                model_ids[i],
                row.len()
            )));
        }
        ensure_unique("model", &model_ids)?;
        ensure_unique("sample", &sample_ids)?;
        Ok(Self {
            entries: rows.into_iter().flatten().collect(),
            model_ids,
            sample_ids,
        })
    }

    /// Matrix with generated ids `M1..Mn` and `s1..sm`.
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let model_ids = (1..=n).map(|i| format!("M{i}")).collect();
        let sample_ids = (1..=m).map(|j| format!("s{j}")).collect();
        Self::new(rows, model_ids, sample_ids)
    }

    pub fn model_count(&self) -> usize {
        self.model_ids.len()
    }

    pub fn sample_count(&self) -> usize {
        self.sample_ids.len()
    }

    #[inline]
    pub fn get(&self, model: usize, sample: usize) -> usize {
        self.entries[model * self.sample_count() + sample]
    }

    pub fn row(&self, model: usize) -> &[usize] {
        let m = self.sample_count();
        &self.entries[model * m..(model + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        self.entries.chunks(self.sample_count())
    }

    pub fn column(&self, sample: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.model_count()).map(move |i| self.get(i, sample))
    }

    pub fn model_ids(&self) -> &[String] {
        &self.model_ids
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    /// Sub-matrix keeping only the listed models, in the listed order.
    pub fn select_models(&self, models: &[usize]) -> Result<Self> {
        let rows = models
            .iter()
            .map(|&i| {
                if i >= self.model_count() {
                    Err(Error::invalid(format!("model index {i} out of range")))
                } else {
                    Ok(self.row(i).to_vec())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let ids = models.iter().map(|&i| self.model_ids[i].clone()).collect();
        Self::new(rows, ids, self.sample_ids.clone())
    }

    /// Sub-matrix keeping only the listed samples, in the listed order.
    pub fn select_samples(&self, samples: &[usize]) -> Result<Self> {
        let rows = self
            .rows()
            .map(|row| samples.iter().map(|&j| row[j]).collect())
            .collect();
        let ids = samples.iter().map(|&j| self.sample_ids[j].clone()).collect();
        Self::new(rows, self.model_ids.clone(), ids)
    }
}

fn ensure_unique(kind: &str, ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::invalid(format!("duplicate {kind} id {id:?}")));
        }
    }
    Ok(())
}

/// Actual labels of the samples. Samples may be unlabeled, which is how a
/// labeling budget is simulated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    labels: Vec<Option<usize>>,
}

impl GroundTruth {
    pub fn full(labels: Vec<usize>) -> Self {
        Self {
            labels: labels.into_iter().map(Some).collect(),
        }
    }

    pub fn partial(labels: Vec<Option<usize>>) -> Self {
        Self { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, sample: usize) -> Option<usize> {
        self.labels.get(sample).copied().flatten()
    }

    pub fn is_complete(&self) -> bool {
        self.labels.iter().all(Option::is_some)
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    /// Reveals only the labels of `samples`; everything else becomes unlabeled.
    pub fn reveal(&self, samples: &[usize]) -> Self {
        let mut labels = vec![None; self.labels.len()];
        for &j in samples {
            labels[j] = self.get(j);
        }
        Self { labels }
    }

    pub fn select_samples(&self, samples: &[usize]) -> Self {
        Self {
            labels: samples.iter().map(|&j| self.get(j)).collect(),
        }
    }
}

/// Per-model class-probability rows, stored as `n × m × c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTensor<T> {
    values: Vec<T>,
    models: usize,
    samples: usize,
    classes: usize,
}

impl<T: Scalar> ProbabilityTensor<T> {
    /// `values` is laid out model-major, then sample, then class.
    pub fn new(values: Vec<T>, models: usize, samples: usize, classes: usize) -> Result<Self> {
        if values.len() != models * samples * classes {
            return Err(Error::invalid(format!(
                "probability tensor has {} values, expected {models}×{samples}×{classes}",
                values.len()
            )));
        }
        Ok(Self {
            values,
            models,
            samples,
            classes,
        })
    }

    pub fn model_count(&self) -> usize {
        self.models
    }

    pub fn sample_count(&self) -> usize {
        self.samples
    }

    pub fn class_count(&self) -> usize {
        self.classes
    }

    pub fn row(&self, model: usize, sample: usize) -> &[T] {
        let start = (model * self.samples + sample) * self.classes;
        &self.values[start..start + self.classes]
    }

    pub fn select_models(&self, models: &[usize]) -> Self {
        let block = self.samples * self.classes;
        let values = models
            .iter()
            .flat_map(|&i| self.values[i * block..(i + 1) * block].iter().copied())
            .collect();
        Self {
            values,
            models: models.len(),
            samples: self.samples,
            classes: self.classes,
        }
    }
}

/// Labeling effort: the number of samples that may be labeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Budget(usize);

impl Budget {
    pub fn new(effort: usize) -> Result<Self> {
        if effort == 0 {
            return Err(Error::invalid("budget must be positive"));
        }
        Ok(Self(effort))
    }

    pub fn effort(self) -> usize {
        self.0
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One problem found by [`validate_context`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, message: String) {
        self.violations.push(Violation { message });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "pass");
        }
        write!(f, "fail:")?;
        for v in &self.violations {
            write!(f, "\n  - {}", v.message)?;
        }
        Ok(())
    }
}

/// Checks label ranges and dimensions of a testing context. Violations are
/// collected, never raised.
pub fn validate_context<T: Scalar>(
    matrix: &PredictionMatrix,
    labels: &LabelSet,
    truth: Option<&GroundTruth>,
    probs: Option<&ProbabilityTensor<T>>,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let (n, m, c) = (matrix.model_count(), matrix.sample_count(), labels.class_count());

    for (i, row) in matrix.rows().enumerate() {
        if let Some((j, &label)) = row.iter().enumerate().find(|(_, &l)| !labels.contains(l)) {
            report.push(format!(
                "label out of range: model {} sample {} predicts {label} (classes 0..{c})",
                matrix.model_ids()[i],
                matrix.sample_ids()[j]
            ));
        }
    }

    if let Some(truth) = truth {
        if truth.len() != m {
            report.push(format!(
                "dimension mismatch: ground truth has {} labels, matrix has {m} samples",
                truth.len()
            ));
        }
        if let Some((j, l)) = truth
            .labels()
            .iter()
            .enumerate()
            .find_map(|(j, l)| l.filter(|&l| !labels.contains(l)).map(|l| (j, l)))
        {
            report.push(format!(
                "label out of range: ground truth of sample {j} is {l} (classes 0..{c})"
            ));
        }
    }

    if let Some(probs) = probs {
        if probs.model_count() != n || probs.sample_count() != m || probs.class_count() != c {
            report.push(format!(
                "dimension mismatch: probabilities are {}×{}×{}, expected {n}×{m}×{c}",
                probs.model_count(),
                probs.sample_count(),
                probs.class_count()
            ));
        } else {
            'outer: for i in 0..n {
                for j in 0..m {
                    let row = probs.row(i, j);
                    if row.iter().any(|p| p.is_nan() || p.as_f64() < 0.0) {
                        report.push(format!(
                            "negative probability: model {} sample {}",
                            matrix.model_ids()[i],
                            matrix.sample_ids()[j]
                        ));
                        break 'outer;
                    }
                    let sum: f64 = row.iter().map(|p| p.as_f64()).sum();
                    if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
                        report.push(format!(
                            "row not normalized (tol {PROBABILITY_TOLERANCE:e}): model {} sample {} sums to {sum}",
                            matrix.model_ids()[i],
                            matrix.sample_ids()[j]
                        ));
                        break 'outer;
                    }
                }
            }
        }
    }

    report
}

/// Fraction of `subset` on which `model` predicts the actual label.
pub fn accuracy(
    matrix: &PredictionMatrix,
    model: usize,
    truth: &GroundTruth,
    subset: &[usize],
) -> Result<Accuracy> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let row = matrix.row(model);
    let mut correct = 0;
    for &j in subset {
        let actual = truth.get(j).ok_or(Error::UnlabeledSample(j))?;
        if row[j] == actual {
            correct += 1;
        }
    }
    Ok(Ratio::new(correct, subset.len()))
}

/// A validated testing context.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    pub labels: LabelSet,
    pub matrix: PredictionMatrix,
    pub truth: Option<GroundTruth>,
    pub probs: Option<ProbabilityTensor<T>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(
        labels: LabelSet,
        matrix: PredictionMatrix,
        truth: Option<GroundTruth>,
        probs: Option<ProbabilityTensor<T>>,
    ) -> Result<Self> {
        let report = validate_context(&matrix, &labels, truth.as_ref(), probs.as_ref());
        if !report.passed() {
            return Err(Error::invalid(report.to_string()));
        }
        Ok(Self {
            labels,
            matrix,
            truth,
            probs,
        })
    }

    pub fn truth(&self) -> Result<&GroundTruth> {
        self.truth.as_ref().ok_or(Error::MissingTruth)
    }

    /// Keeps only the listed models (the fewer-models scenario).
    pub fn select_models(&self, models: &[usize]) -> Result<Self> {
        Ok(Self {
            labels: self.labels,
            matrix: self.matrix.select_models(models)?,
            truth: self.truth.clone(),
            probs: self.probs.as_ref().map(|p| p.select_models(models)),
        })
    }
}
