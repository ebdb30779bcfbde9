//! The two worked examples used throughout the tests and docs.

use crate::context::{GroundTruth, LabelSet, PredictionMatrix};

/// Four models over four samples with classes star = 0, triangle = 1, diamond = 2.
pub fn fig3() -> (PredictionMatrix, LabelSet) {
    let rows = vec![
        vec![0, 1, 2, 0],
        vec![2, 1, 0, 0],
        vec![0, 1, 2, 1],
        vec![0, 0, 2, 0],
    ];
    (
        PredictionMatrix::from_rows(rows).expect("fixture"),
        LabelSet::new(3).expect("fixture"),
    )
}

/// Three models over six samples, two classes, all actual labels 0. A
/// prediction of 1 marks a wrong answer; the models score 4/6, 3/6 and 2/6.
pub fn fig2() -> (PredictionMatrix, LabelSet, GroundTruth) {
    let rows = vec![
        vec![0, 0, 0, 0, 1, 1],
        vec![0, 1, 1, 0, 1, 0],
        vec![1, 1, 0, 1, 1, 0],
    ];
    (
        PredictionMatrix::from_rows(rows).expect("fixture"),
        LabelSet::new(2).expect("fixture"),
        GroundTruth::full(vec![0; 6]),
    )
}
