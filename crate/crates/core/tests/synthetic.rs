use sds_core::harness::{
    interval_analysis, run_sweep, sweep_selection_rate, Difficulty, ExperimentConfig, SyntheticSpec,
};
use sds_core::selection::SdsSelector;
use sds_core::{Budget, Dataset, LabelSet, Method, PredictionMatrix};

fn accuracies(ds: &Dataset<f64>) -> Vec<f64> {
    let truth = ds.truth().unwrap();
    (0..ds.matrix.model_count())
        .map(|i| {
            let row = ds.matrix.row(i);
            row.iter().enumerate().filter(|&(j, &p)| truth.get(j) == Some(p)).count() as f64 / row.len() as f64
        })
        .collect()
}

#[test]
fn realized_accuracies_track_targets() {
    let spec = SyntheticSpec::evenly_spaced(25, 10_000, 10, 0.60, 0.95, 21);
    let ds: Dataset<f64> = spec.generate().unwrap();
    for (got, want) in accuracies(&ds).iter().zip(&spec.accuracies) {
        assert!((got - want).abs() <= 0.015, "{got} vs {want}");
    }
}

/// 2×2 chi-square statistic of the error indicators of two models.
fn chi_square(ds: &Dataset<f64>, a: usize, b: usize) -> f64 {
    let truth = ds.truth().unwrap();
    let m = ds.matrix.sample_count();
    let mut table = [[0f64; 2]; 2];
    for j in 0..m {
        let ea = (truth.get(j) != Some(ds.matrix.get(a, j))) as usize;
        let eb = (truth.get(j) != Some(ds.matrix.get(b, j))) as usize;
        table[ea][eb] += 1.0;
    }
    let n = m as f64;
    let mut stat = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let expected = (table[r][0] + table[r][1]) * (table[0][c] + table[1][c]) / n;
            stat += (table[r][c] - expected).powi(2) / expected;
        }
    }
    stat
}

#[test]
fn shared_difficulty_controls_error_correlation() {
    let mut spec = SyntheticSpec::evenly_spaced(6, 10_000, 5, 0.6, 0.8, 4);
    spec.shared_difficulty = 0.0;
    let independent: Dataset<f64> = spec.generate().unwrap();
    spec.shared_difficulty = 1.0;
    let shared: Dataset<f64> = spec.generate().unwrap();
    let pairs = [(0, 1), (2, 3), (4, 5)];
    for (a, b) in pairs {
        // 99.9% quantile of chi-square with one degree of freedom
        assert!(chi_square(&independent, a, b) < 10.83, "pair ({a},{b})");
        assert!(chi_square(&shared, a, b) > 100.0, "pair ({a},{b})");
    }
}

#[test]
fn flat_difficulty_is_feasible_everywhere() {
    let mut spec = SyntheticSpec::evenly_spaced(3, 500, 3, 0.05, 0.5, 1);
    spec.difficulty = Difficulty::Flat;
    assert!(spec.generate::<f64>().is_ok());
}

#[test]
fn full_rate_draws_like_uniform_sampling() {
    let ds: Dataset<f64> = SyntheticSpec::evenly_spaced(6, 40, 3, 0.6, 0.9, 8).generate().unwrap();
    let selector = SdsSelector::<f64>::new(&ds.matrix, &ds.labels, 0.27).unwrap();
    let mut hits = vec![0usize; 40];
    let draws = 20_000;
    for seed in 0..draws {
        for j in selector.select(Budget::new(4).unwrap(), 1.0, seed).unwrap().indices {
            hits[j] += 1;
        }
    }
    // each sample is included with probability 4/40
    for (j, &h) in hits.iter().enumerate() {
        let rate = h as f64 / draws as f64;
        assert!((rate - 0.1).abs() < 0.01, "sample {j}: {rate}");
    }
}

#[test]
fn equal_discrimination_falls_back_to_index_order() {
    let rows = vec![vec![0, 1, 2, 0, 1, 2, 0, 1]; 4];
    let matrix = PredictionMatrix::from_rows(rows).unwrap();
    let selector = SdsSelector::<f64>::new(&matrix, &LabelSet::new(3).unwrap(), 0.27).unwrap();
    assert!(selector.profile().values.iter().all(|&d| d == 0.0));
    assert_eq!(selector.candidates(0.25).unwrap(), &[0, 1]);
}

#[test]
fn adjacent_bands_meet() {
    let mut spec = SyntheticSpec::evenly_spaced(5, 400, 3, 0.7, 0.9, 2);
    spec.difficulty = Difficulty::Flat;
    let ds: Dataset<f64> = spec.generate().unwrap();
    let cfg = ExperimentConfig {
        budgets: vec![20],
        repetitions: 10,
        ..Default::default()
    };
    let analysis = interval_analysis(&ds, &[(0.0, 0.5), (0.5, 1.0)], &cfg).unwrap();
    assert_eq!(analysis.bands.len(), 2);
    assert_eq!(analysis.bands[0].end, analysis.bands[1].start);
}

#[test]
fn rates_share_trial_seeds() {
    let ds: Dataset<f64> = SyntheticSpec::evenly_spaced(8, 1000, 4, 0.6, 0.9, 6).generate().unwrap();
    let cfg = ExperimentConfig {
        budgets: vec![30, 60],
        repetitions: 5,
        ..Default::default()
    };
    let rates = sweep_selection_rate(&ds, &[0.25], &cfg).unwrap();
    let sweep = run_sweep(
        &ds,
        &ExperimentConfig {
            methods: vec![Method::Sds],
            ..cfg
        },
    )
    .unwrap();
    assert_eq!(rates[0].report.cells, sweep.cells);
}
