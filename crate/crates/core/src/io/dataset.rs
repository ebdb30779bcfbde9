//! CSV interchange files: predictions, truth and probabilities.

use std::collections::HashMap;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};

use crate::context::{
    validate_context, Dataset, GroundTruth, LabelSet, PredictionMatrix, ProbabilityTensor, ValidationReport,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::manifest::{DatasetManifest, ProbabilityFiles, FORMAT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadOptions {
    /// Leave the truth file untouched, even if it does not exist.
    pub skip_truth: bool,
    pub skip_probabilities: bool,
}

/// Parsed files, not yet checked for label ranges or normalization.
#[derive(Debug, Clone)]
pub struct LoadedParts<T> {
    pub manifest: DatasetManifest,
    pub labels: LabelSet,
    pub matrix: PredictionMatrix,
    pub truth: Option<GroundTruth>,
    pub probs: Option<ProbabilityTensor<T>>,
}

impl<T: Scalar> LoadedParts<T> {
    pub fn validate(&self) -> ValidationReport {
        validate_context(&self.matrix, &self.labels, self.truth.as_ref(), self.probs.as_ref())
    }

    pub fn into_dataset(self) -> Result<Dataset<T>> {
        Dataset::new(self.labels, self.matrix, self.truth, self.probs)
    }
}

pub fn load_parts<T: Scalar>(manifest_path: &Path, options: LoadOptions) -> Result<LoadedParts<T>> {
    let manifest = DatasetManifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let labels = LabelSet::new(manifest.class_names.len())?;

    let matrix = read_predictions(&DatasetManifest::resolve(base, &manifest.predictions), &manifest)?;
    let truth = match (&manifest.truth, options.skip_truth) {
        (Some(file), false) => Some(read_truth(&DatasetManifest::resolve(base, file), &manifest, &matrix)?),
        _ => None,
    };
    let probs = match (&manifest.probabilities, options.skip_probabilities) {
        (Some(ProbabilityFiles::Indexed(file)), false) => Some(read_indexed_probabilities(
            &DatasetManifest::resolve(base, file),
            &manifest,
            &matrix,
        )?),
        (Some(ProbabilityFiles::PerModel(files)), false) => {
            let mut values = Vec::with_capacity(manifest.models * manifest.samples * labels.class_count());
            if let Some(unknown) = files.keys().find(|id| !matrix.model_ids().contains(id)) {
                return Err(dataset_error(manifest_path, format!("probability file for unknown model {unknown:?}")));
            }
            for id in matrix.model_ids() {
                let file = files
                    .get(id)
                    .ok_or_else(|| dataset_error(manifest_path, format!("no probability file for model {id:?}")))?;
                values.extend(read_model_probabilities::<T>(
                    &DatasetManifest::resolve(base, file),
                    &manifest,
                    &matrix,
                )?);
            }
            Some(ProbabilityTensor::new(values, manifest.models, manifest.samples, labels.class_count())?)
        }
        _ => None,
    };

    Ok(LoadedParts {
        manifest,
        labels,
        matrix,
        truth,
        probs,
    })
}

/// Loads and validates the dataset a manifest describes.
pub fn load_dataset<T: Scalar>(manifest_path: &Path, options: LoadOptions) -> Result<Dataset<T>> {
    let parts = load_parts(manifest_path, options)?;
    let report = parts.validate();
    if !report.passed() {
        return Err(dataset_error(manifest_path, report.to_string()));
    }
    parts.into_dataset()
}

fn dataset_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Dataset {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn parse_error(path: &Path, record: &StringRecord, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: record.position().map_or(0, |p| p.line()),
        message: message.into(),
    }
}

fn records(path: &Path) -> Result<Vec<StringRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(file);
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        out.push(record);
    }
    if out.is_empty() {
        return Err(dataset_error(path, "file is empty"));
    }
    Ok(out)
}

fn expect_header(path: &Path, header: &StringRecord, leading: &[&str], rest: Option<&[String]>) -> Result<()> {
    for (k, name) in leading.iter().enumerate() {
        if header.get(k) != Some(*name) {
            return Err(parse_error(
                path,
                header,
                format!("header column {} must be {name:?}", k + 1),
            ));
        }
    }
    if let Some(rest) = rest {
        let got: Vec<&str> = header.iter().skip(leading.len()).collect();
        if got.len() != rest.len() || got.iter().zip(rest).any(|(a, b)| a != b) {
            return Err(parse_error(
                path,
                header,
                format!("header must list the manifest classes in order: {}", rest.join(",")),
            ));
        }
    }
    Ok(())
}

fn class_of(path: &Path, record: &StringRecord, manifest: &DatasetManifest, name: &str) -> Result<usize> {
    manifest
        .class_index(name)
        .ok_or_else(|| parse_error(path, record, format!("class not in manifest: {name:?}")))
}

fn index_of(ids: &[String]) -> HashMap<&str, usize> {
    ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()
}

pub fn read_predictions(path: &Path, manifest: &DatasetManifest) -> Result<PredictionMatrix> {
    let records = records(path)?;
    let header = &records[0];
    expect_header(path, header, &["model"], None)?;
    let sample_ids: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    if sample_ids.len() != manifest.samples {
        return Err(dataset_error(
            path,
            format!(
                "dimension mismatch: {} sample columns, manifest declares {}",
                sample_ids.len(),
                manifest.samples
            ),
        ));
    }
    let mut model_ids = Vec::new();
    let mut rows = Vec::new();
    for record in &records[1..] {
        if record.len() != sample_ids.len() + 1 {
            return Err(parse_error(
                path,
                record,
                format!("expected {} fields, found {}", sample_ids.len() + 1, record.len()),
            ));
        }
        model_ids.push(record[0].to_owned());
        rows.push(
            record
                .iter()
                .skip(1)
                .map(|name| class_of(path, record, manifest, name))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if rows.len() != manifest.models {
        return Err(dataset_error(
            path,
            format!(
                "dimension mismatch: {} model rows, manifest declares {}",
                rows.len(),
                manifest.models
            ),
        ));
    }
    PredictionMatrix::new(rows, model_ids, sample_ids).map_err(|e| dataset_error(path, e.to_string()))
}

/// Samples missing from the file, or with an empty label, stay unlabeled.
pub fn read_truth(path: &Path, manifest: &DatasetManifest, matrix: &PredictionMatrix) -> Result<GroundTruth> {
    let records = records(path)?;
    expect_header(path, &records[0], &["sample", "label"], Some(&[]))?;
    let samples = index_of(matrix.sample_ids());
    let mut labels = vec![None; matrix.sample_count()];
    let mut seen = vec![false; matrix.sample_count()];
    for record in &records[1..] {
        if record.len() != 2 {
            return Err(parse_error(path, record, format!("expected 2 fields, found {}", record.len())));
        }
        let j = *samples
            .get(&record[0])
            .ok_or_else(|| parse_error(path, record, format!("unknown sample id {:?}", &record[0])))?;
        if std::mem::replace(&mut seen[j], true) {
            return Err(parse_error(path, record, format!("duplicate sample id {:?}", &record[0])));
        }
        if !record[1].is_empty() {
            labels[j] = Some(class_of(path, record, manifest, &record[1])?);
        }
    }
    Ok(GroundTruth::partial(labels))
}

fn parse_row<T: Scalar>(path: &Path, record: &StringRecord, skip: usize) -> Result<Vec<T>> {
    record
        .iter()
        .skip(skip)
        .map(|v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(T::of)
                .ok_or_else(|| parse_error(path, record, format!("not a finite number: {v:?}")))
        })
        .collect()
}

pub fn read_indexed_probabilities<T: Scalar>(
    path: &Path,
    manifest: &DatasetManifest,
    matrix: &PredictionMatrix,
) -> Result<ProbabilityTensor<T>> {
    let records = records(path)?;
    expect_header(path, &records[0], &["model", "sample"], Some(&manifest.class_names))?;
    let (n, m, c) = (matrix.model_count(), matrix.sample_count(), manifest.class_names.len());
    let models = index_of(matrix.model_ids());
    let samples = index_of(matrix.sample_ids());
    let mut values = vec![T::zero(); n * m * c];
    let mut seen = vec![false; n * m];
    for record in &records[1..] {
        if record.len() != c + 2 {
            return Err(parse_error(path, record, format!("expected {} fields, found {}", c + 2, record.len())));
        }
        let i = *models
            .get(&record[0])
            .ok_or_else(|| parse_error(path, record, format!("unknown model id {:?}", &record[0])))?;
        let j = *samples
            .get(&record[1])
            .ok_or_else(|| parse_error(path, record, format!("unknown sample id {:?}", &record[1])))?;
        if std::mem::replace(&mut seen[i * m + j], true) {
            return Err(parse_error(path, record, "duplicate (model, sample) row"));
        }
        let start = (i * m + j) * c;
        values[start..start + c].copy_from_slice(&parse_row::<T>(path, record, 2)?);
    }
    let rows = seen.iter().filter(|&&s| s).count();
    if rows != n * m {
        return Err(dataset_error(
            path,
            format!("dimension mismatch: {rows} probability rows, expected {n}×{m}"),
        ));
    }
    ProbabilityTensor::new(values, n, m, c)
}

/// One model's rows, in the matrix's sample order.
pub fn read_model_probabilities<T: Scalar>(
    path: &Path,
    manifest: &DatasetManifest,
    matrix: &PredictionMatrix,
) -> Result<Vec<T>> {
    let records = records(path)?;
    expect_header(path, &records[0], &["sample"], Some(&manifest.class_names))?;
    let (m, c) = (matrix.sample_count(), manifest.class_names.len());
    let samples = index_of(matrix.sample_ids());
    let mut values = vec![T::zero(); m * c];
    let mut seen = vec![false; m];
    for record in &records[1..] {
        if record.len() != c + 1 {
            return Err(parse_error(path, record, format!("expected {} fields, found {}", c + 1, record.len())));
        }
        let j = *samples
            .get(&record[0])
            .ok_or_else(|| parse_error(path, record, format!("unknown sample id {:?}", &record[0])))?;
        if std::mem::replace(&mut seen[j], true) {
            return Err(parse_error(path, record, format!("duplicate sample id {:?}", &record[0])));
        }
        values[j * c..(j + 1) * c].copy_from_slice(&parse_row::<T>(path, record, 1)?);
    }
    let rows = seen.iter().filter(|&&s| s).count();
    if rows != m {
        return Err(dataset_error(
            path,
            format!("dimension mismatch: {rows} probability rows, expected {m}"),
        ));
    }
    Ok(values)
}

/// Writes `manifest.json`, `predictions.csv` and, when present, `truth.csv`
/// and an indexed `probabilities.csv` into `dir`. Returns the manifest path.
pub fn write_dataset<T: Scalar>(
    dataset: &Dataset<T>,
    name: &str,
    class_names: &[String],
    dir: &Path,
) -> Result<PathBuf> {
    let c = dataset.labels.class_count();
    if class_names.len() != c {
        return Err(Error::invalid(format!(
            "{} class names for {c} classes",
            class_names.len()
        )));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let matrix = &dataset.matrix;

    let predictions = dir.join("predictions.csv");
    let mut w = csv_writer(&predictions)?;
    let mut header = vec!["model"];
    header.extend(matrix.sample_ids().iter().map(String::as_str));
    write_record(&mut w, &predictions, &header)?;
    for (i, row) in matrix.rows().enumerate() {
        let mut record = vec![matrix.model_ids()[i].as_str()];
        record.extend(row.iter().map(|&l| class_names[l].as_str()));
        write_record(&mut w, &predictions, &record)?;
    }
    finish(w, &predictions)?;

    let truth = match &dataset.truth {
        Some(truth) => {
            let path = dir.join("truth.csv");
            let mut w = csv_writer(&path)?;
            write_record(&mut w, &path, ["sample", "label"])?;
            for (j, label) in truth.labels().iter().enumerate() {
                let name = label.map_or("", |l| class_names[l].as_str());
                write_record(&mut w, &path, [matrix.sample_ids()[j].as_str(), name])?;
            }
            finish(w, &path)?;
            Some(PathBuf::from("truth.csv"))
        }
        None => None,
    };

    let probabilities = match &dataset.probs {
        Some(probs) => {
            let path = dir.join("probabilities.csv");
            let mut w = csv_writer(&path)?;
            let mut header = vec!["model".to_owned(), "sample".to_owned()];
            header.extend(class_names.iter().cloned());
            write_record(&mut w, &path, &header)?;
            for i in 0..matrix.model_count() {
                for j in 0..matrix.sample_count() {
                    let mut record = vec![matrix.model_ids()[i].clone(), matrix.sample_ids()[j].clone()];
                    record.extend(probs.row(i, j).iter().map(|p| p.to_string()));
                    write_record(&mut w, &path, &record)?;
                }
            }
            finish(w, &path)?;
            Some(ProbabilityFiles::Indexed(PathBuf::from("probabilities.csv")))
        }
        None => None,
    };

    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION.to_owned(),
        name: name.to_owned(),
        class_names: class_names.to_vec(),
        models: matrix.model_count(),
        samples: matrix.sample_count(),
        predictions: PathBuf::from("predictions.csv"),
        truth,
        probabilities,
    };
    let path = dir.join("manifest.json");
    manifest.write(&path)?;
    Ok(path)
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

pub(crate) fn write_record<I, S>(w: &mut csv::Writer<File>, path: &Path, record: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(record).map_err(|e| csv_error(path, e))
}

pub(crate) fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => dataset_error(path, format!("{other:?}")),
    }
}
