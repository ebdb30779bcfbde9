//! Acceptance gate: one PASS/FAIL line per criterion. Exits nonzero when any
//! criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use sds_core::harness::{interval_analysis, run_sweep, ExperimentConfig, Indicator, SyntheticSpec, QUARTILES};
use sds_core::io::{load_dataset, LoadOptions};
use sds_core::metrics::{
    accuracies, jaccard_topk, rank_by_accuracy, ranking_spearman, spearman, Ranking, RankingSource,
};
use sds_core::rng::SeededRng;
use sds_core::selection::DiscriminationProfile;
use sds_core::stats::{cliffs_delta, wilcoxon_normal, Verdict};
use sds_core::{Dataset, LabelSet, Method, PredictionMatrix};

use common::*;

const FIG3_MAX_RUNTIME: Duration = Duration::from_secs(1);
const METRIC_MAX_RUNTIME: Duration = Duration::from_secs(30);
const RQ1_MAX_RUNTIME: Duration = Duration::from_secs(300);
const SPEARMAN_TOLERANCE: f64 = 1e-12;
const WILCOXON_TOLERANCE: f64 = 0.05;
const WILCOXON_MAX_PER_SIDE: usize = 8;
const ALPHA: f64 = 0.05;
const NEGLIGIBLE_DELTA: f64 = 0.147;
const REPETITIONS: usize = 50;
const RQ1_BUDGET: usize = 90;
const SYNTHETIC_SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
        .join("manifest.json")
}

fn fig3_worked_example() -> Outcome {
    let start = Instant::now();
    let ds: Dataset<f64> = match load_dataset(&fixture("fig3"), LoadOptions::default()) {
        Ok(ds) => ds,
        Err(e) => return outcome(false, e.to_string()),
    };
    let p = DiscriminationProfile::<f64>::compute(&ds.matrix, &ds.labels, 0.27).unwrap();
    let elapsed = start.elapsed();
    let names = ["star", "triangle", "diamond"];
    let voted: Vec<&str> = p.voted.labels.iter().map(|&l| names[l]).collect();
    let ok = voted == ["star", "triangle", "diamond", "star"]
        && p.scores.scores == [4, 2, 3, 3]
        && p.partition.top == [0]
        && p.partition.bottom == [1]
        && p.values == [1.0, 0.0, 1.0, 0.0]
        && elapsed < FIG3_MAX_RUNTIME;
    outcome(
        ok,
        format!(
            "voted {voted:?}, scores {:?}, S_t {:?}, S_b {:?}, discrimination {:?}, {elapsed:?}",
            p.scores.scores, p.partition.top, p.partition.bottom, p.values
        ),
    )
}

fn fig2_motivation() -> Outcome {
    let ds: Dataset<f64> = match load_dataset(&fixture("fig2"), LoadOptions::default()) {
        Ok(ds) => ds,
        Err(e) => return outcome(false, e.to_string()),
    };
    let truth = ds.truth().unwrap();
    let all: Vec<usize> = (0..6).collect();
    let acc = accuracies(&ds.matrix, truth, &all).unwrap();
    let expected = [Ratio::new(4, 6), Ratio::new(3, 6), Ratio::new(2, 6)];
    let actual = rank_by_accuracy::<f64>(&ds.matrix, truth, &all, RankingSource::Actual).unwrap();
    let subset = [0, 1];
    let estimated =
        rank_by_accuracy::<f64>(&ds.matrix, &truth.reveal(&subset), &subset, RankingSource::Estimated).unwrap();
    let rho = ranking_spearman(&estimated, &actual).unwrap();
    let acc_text: Vec<String> = acc.iter().map(|a| a.to_string()).collect();
    outcome(acc == expected && rho == 1.0, format!("accuracies {acc_text:?}, rho over {{s1,s2}} = {rho}"))
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = SeededRng::new(17);

    let mut max_err: f64 = 0.0;
    let mut pairs = 0;
    while pairs < 1000 {
        let n = 2 + rng.below(30);
        let levels = 1 + rng.below(n);
        let x: Vec<f64> = (0..n).map(|_| rng.below(levels) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.below(levels) as f64).collect();
        let (rx, ry) = (midranks_desc(&x), midranks_desc(&y));
        let direct = direct_spearman(&rx, &ry);
        if !direct.is_finite() {
            continue;
        }
        max_err = max_err.max((spearman(&rx, &ry).unwrap() - direct).abs());
        pairs += 1;
    }
    let spearman_ok = max_err <= SPEARMAN_TOLERANCE;

    // estimated M1, M3, M5, ... against actual M1, M3, M2, ...
    let estimated = Ranking::<f64> {
        ranks: vec![1.0, 4.0, 2.0, 5.0, 3.0],
        source: RankingSource::Estimated,
    };
    let actual = Ranking::<f64> {
        ranks: vec![1.0, 3.0, 2.0, 4.0, 5.0],
        source: RankingSource::Actual,
    };
    let j3 = jaccard_topk(&estimated, &actual, 3).unwrap();
    let jaccard_ok = j3 == 0.5;

    let mut cliff_mismatch = 0;
    for _ in 0..1000 {
        let a: Vec<f64> = (0..1 + rng.below(40)).map(|_| rng.below(20) as f64 / 4.0).collect();
        let b: Vec<f64> = (0..1 + rng.below(40)).map(|_| rng.below(20) as f64 / 4.0).collect();
        if cliffs_delta::<f64>(&a, &b).unwrap().0 != brute_cliffs_delta(&a, &b) {
            cliff_mismatch += 1;
        }
    }
    let cliff_ok = cliff_mismatch == 0;

    let mut failing: Vec<(usize, usize, f64)> = Vec::new();
    let mut worst: (f64, usize, usize) = (0.0, 0, 0);
    let mut cases = 0;
    for n1 in 1..=WILCOXON_MAX_PER_SIDE {
        for n2 in 1..=WILCOXON_MAX_PER_SIDE {
            let exact = enumerated_rank_sum_p(n1, n2);
            let mut pair_worst: f64 = 0.0;
            for positions in arrangements(n1, n2) {
                let a: Vec<f64> = positions.iter().map(|&r| r as f64).collect();
                let b: Vec<f64> = (1..=n1 + n2).filter(|r| !positions.contains(r)).map(|r| r as f64).collect();
                let approx: f64 = wilcoxon_normal(&a, &b).unwrap();
                let diff = (approx - exact[positions.iter().sum::<usize>()]).abs();
                pair_worst = pair_worst.max(diff);
                cases += 1;
            }
            if pair_worst > WILCOXON_TOLERANCE {
                failing.push((n1, n2, pair_worst));
            }
            if pair_worst > worst.0 {
                worst = (pair_worst, n1, n2);
            }
        }
    }
    let wilcoxon_ok = failing.is_empty();
    let elapsed = start.elapsed();

    let mut detail = format!(
        "spearman max |err| {max_err:.1e} over {pairs} pairs [{}]; J3 = {j3} [{}]; cliff mismatches {cliff_mismatch}/1000 [{}]; \
         wilcoxon normal vs exact over {cases} tie-free arrangements: worst |dp| {:.4} at ({},{}), {} of {} size pairs above {WILCOXON_TOLERANCE} [{}]; {elapsed:?}",
        tag(spearman_ok),
        tag(jaccard_ok),
        tag(cliff_ok),
        worst.0,
        worst.1,
        worst.2,
        failing.len(),
        WILCOXON_MAX_PER_SIDE * WILCOXON_MAX_PER_SIDE,
        tag(wilcoxon_ok),
    );
    if !failing.is_empty() {
        let list: Vec<String> = failing.iter().map(|(a, b, d)| format!("({a},{b}):{d:.3}")).collect();
        detail.push_str(&format!("; failing sizes {}", list.join(" ")));
    }
    outcome(
        spearman_ok && jaccard_ok && cliff_ok && wilcoxon_ok && elapsed < METRIC_MAX_RUNTIME,
        detail,
    )
}

fn tag(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn algorithm_one_oracle() -> Outcome {
    let mut rng = SeededRng::new(31);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = 2 + rng.below(7);
        let m = 1 + rng.below(12);
        let c = 2 + rng.below(3);
        let rows: Vec<Vec<usize>> = (0..n).map(|_| (0..m).map(|_| rng.below(c)).collect()).collect();
        let expected = reference_profile(&rows, c);
        let matrix = PredictionMatrix::from_rows(rows).unwrap();
        let p = DiscriminationProfile::<f64>::compute(&matrix, &LabelSet::new(c).unwrap(), 0.27).unwrap();
        let mut top = p.partition.top.clone();
        let mut bottom = p.partition.bottom.clone();
        top.sort();
        bottom.sort();
        let same = p.voted.labels == expected.voted
            && p.scores.scores == expected.scores
            && top == expected.top
            && bottom == expected.bottom
            && p.values == expected.discrimination;
        if !same {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{mismatches}/200 instances differ"))
}

struct Synthetic {
    dataset: Dataset<f64>,
    report: sds_core::harness::TrialReport<f64>,
    elapsed: Duration,
}

fn synthetic_run() -> Synthetic {
    let start = Instant::now();
    let dataset: Dataset<f64> = SyntheticSpec::evenly_spaced(25, 10_000, 10, 0.60, 0.95, SYNTHETIC_SEED)
        .generate()
        .unwrap();
    let config = ExperimentConfig {
        budgets: vec![35, RQ1_BUDGET, 180],
        repetitions: REPETITIONS,
        ..Default::default()
    };
    let report = run_sweep(&dataset, &config).unwrap();
    Synthetic {
        dataset,
        report,
        elapsed: start.elapsed(),
    }
}

fn rq1_analogue(s: &Synthetic) -> Outcome {
    let mean = |m: Method| s.report.cell(m, RQ1_BUDGET).unwrap().mean_spearman;
    let vs = |m: Method| s.report.comparison(m, Indicator::Spearman, Some(RQ1_BUDGET)).unwrap().stats;
    let (sds, srs, rdg) = (mean(Method::Sds), mean(Method::Srs), mean(Method::Rdg));
    let (c_srs, c_rdg) = (vs(Method::Srs), vs(Method::Rdg));
    let wins = |c: &sds_core::stats::ComparisonStats<f64>| {
        c.p_value < ALPHA && c.delta > NEGLIGIBLE_DELTA && c.verdict == Verdict::W
    };
    let ok = sds > srs && wins(&c_srs) && sds >= rdg && wins(&c_rdg) && s.elapsed < RQ1_MAX_RUNTIME;
    outcome(
        ok,
        format!(
            "budget {RQ1_BUDGET}: mean rho SDS {sds:.4}, SRS {srs:.4} (p {:.2e}, delta {:.3}, {}), RDG {rdg:.4} (p {:.2e}, delta {:.3}, {}); sweep {:?}",
            c_srs.p_value, c_srs.delta, c_srs.verdict, c_rdg.p_value, c_rdg.delta, c_rdg.verdict, s.elapsed
        ),
    )
}

fn budget_trend(s: &Synthetic) -> Outcome {
    let low = s.report.cell(Method::Sds, 35).unwrap().mean_spearman;
    let high = s.report.cell(Method::Sds, 180).unwrap().mean_spearman;
    outcome(high > low, format!("mean rho SDS at 35 = {low:.4}, at 180 = {high:.4}"))
}

fn interval_ablation(s: &Synthetic) -> Outcome {
    let config = ExperimentConfig {
        budgets: vec![RQ1_BUDGET],
        repetitions: REPETITIONS,
        ..Default::default()
    };
    let analysis = interval_analysis(&s.dataset, &QUARTILES, &config).unwrap();
    let top = analysis.bands[0].report.cells[0].mean_spearman;
    let bottom = analysis.bands[3].report.cells[0].mean_spearman;
    let cmp = analysis
        .comparisons
        .iter()
        .find(|c| c.band == 3 && c.budget == Some(RQ1_BUDGET))
        .unwrap();
    outcome(
        top > bottom && cmp.stats.p_value < ALPHA,
        format!(
            "budget {RQ1_BUDGET}: mean rho top band {top:.4}, 75-100% band {bottom:.4}, p {:.2e}",
            cmp.stats.p_value
        ),
    )
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let sds = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_sds"))
            .env_remove("SDS_OUTPUT_DIR")
            .args(args)
            .output()
            .unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let path = |p: &str| dir.path().join(p).to_string_lossy().into_owned();
    let data = path("data");
    sds(&["synth", "--models", "10", "--samples", "2000", "--classes", "5", "--seed", "4", "--out", &data]);
    let manifest = path("data/manifest.json");

    let mut checks: Vec<(&str, bool)> = Vec::new();
    let select = ["select", "--manifest", &manifest, "--method", "sds", "--budget", "60", "--seed", "7"];
    checks.push(("select", sds(&select) == sds(&select)));

    let invocations: [(&str, Vec<&str>); 4] = [
        ("synth", vec!["synth", "--models", "10", "--samples", "2000", "--classes", "5", "--seed", "4"]),
        ("sweep", vec!["sweep", "--manifest", &manifest, "--budgets", "20:60:20", "--reps", "10", "--seed", "3"]),
        ("ablate interval", vec!["ablate", "interval", "--manifest", &manifest, "--budgets", "30", "--reps", "10"]),
        ("ablate rate", vec!["ablate", "rate", "--manifest", &manifest, "--budgets", "30,60", "--reps", "5"]),
    ];
    for (name, args) in &invocations {
        let mut trees = Vec::new();
        for run in ["a", "b"] {
            let out = path(&format!("{}-{run}", name.replace(' ', "-")));
            let mut full = args.clone();
            full.extend(["--out", &out]);
            sds(&full);
            trees.push(tree(Path::new(&out)));
        }
        checks.push((name, !trees[0].is_empty() && trees[0] == trees[1]));
    }
    let ok = checks.iter().all(|c| c.1);
    let detail: Vec<String> = checks.iter().map(|(n, c)| format!("{n} [{}]", tag(*c))).collect();
    outcome(ok, detail.join(", "))
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("fig3 worked example", fig3_worked_example()),
        ("fig2 motivation", fig2_motivation()),
        ("metric oracles", metric_oracles()),
        ("algorithm-1 oracle", algorithm_one_oracle()),
    ];
    let synthetic = synthetic_run();
    results.push(("synthetic SDS vs SRS and RDG", rq1_analogue(&synthetic)));
    results.push(("budget trend", budget_trend(&synthetic)));
    results.push(("interval ablation", interval_ablation(&synthetic)));
    results.push(("cli determinism", cli_determinism()));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
