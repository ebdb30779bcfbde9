//! On-disk formats: the dataset manifest and its CSV files, report bundles
//! and the budget-list syntax.

mod budgets;
mod dataset;
mod manifest;
mod report;

pub use budgets::parse_budgets;
pub use dataset::{
    load_dataset, load_parts, read_indexed_probabilities, read_model_probabilities, read_predictions, read_truth,
    write_dataset, LoadOptions, LoadedParts,
};
pub use manifest::{DatasetManifest, ProbabilityFiles, FORMAT_VERSION};
pub use report::{
    read_json, read_report, render_series, render_summary, write_json, write_report, ReportBundle, REPORT_FILE,
    SERIES_DIR, SUMMARY_FILE,
};
