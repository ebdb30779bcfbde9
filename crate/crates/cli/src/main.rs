use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use sds_core::harness::{
    interval_analysis, run_fewer_models, run_sweep, run_vote_rank_comparison, spread_models, sweep_selection_rate,
    voting_match_rate, Difficulty, ErrorLabels, ExperimentConfig, GiniAggregate, Pairing, SyntheticSpec,
    TrialReport, DEFAULT_RATES, QUARTILES,
};
use sds_core::io::{
    load_dataset, load_parts, parse_budgets, read_report, read_truth, render_summary, write_dataset, write_json,
    write_report, DatasetManifest, LoadOptions,
};
use sds_core::metrics::{jaccard_topk, rank_by_accuracy, ranking_spearman, RankingSource};
use sds_core::selection::{
    ddg_select, gini_scores, rdg_select, srs_select, GiniSource, SdsSelector, DEFAULT_CUTOFF, DEFAULT_GROUP_FRACTION,
};
use sds_core::{accuracy, Budget, Dataset, Method, Scalar};

const OUTPUT_ENV: &str = "SDS_OUTPUT_DIR";

/// Rank classifiers from a small labeled subset chosen by sample discrimination.
#[derive(Parser)]
#[command(name = "sds", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a dataset manifest and the files it references.
    Validate(ValidateArgs),
    /// Select samples to label; prints one index per line.
    Select(SelectArgs),
    /// Rank models on a labeled subset.
    Rank(RankArgs),
    /// Repeated trials of every method over a budget grid.
    Sweep(SweepArgs),
    /// Follow-up studies.
    #[command(subcommand)]
    Ablate(AblateCommand),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Re-render the summary and series files of a stored report.
    Report(ReportArgs),
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Sds,
    Srs,
    Ddg,
    Rdg,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Sds => Method::Sds,
            MethodArg::Srs => Method::Srs,
            MethodArg::Ddg => Method::Ddg,
            MethodArg::Rdg => Method::Rdg,
        }
    }
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Candidate pool fraction for SDS and RDG.
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: f64,
    /// Top/bottom group fraction for SDS.
    #[arg(long, default_value_t = DEFAULT_GROUP_FRACTION)]
    fraction: f64,
    /// Impurity from this model's probabilities instead of the mean over models.
    #[arg(long, value_name = "MODEL_ID")]
    gini_model: Option<String>,
    /// Print sample ids instead of indices.
    #[arg(long)]
    ids: bool,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Labels of the subset, as `sample,label` rows.
    #[arg(long, conflicts_with = "indices", required_unless_present = "indices")]
    labels: Option<PathBuf>,
    /// Sample indices, one per line; labels come from the manifest's truth.
    #[arg(long)]
    indices: Option<PathBuf>,
    /// Also report Spearman and Jaccard against the full-truth ranking.
    #[arg(long)]
    compare: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairingArg {
    Paired,
    Unpaired,
}

#[derive(Clone, Copy, ValueEnum)]
enum GiniArg {
    Mean,
    Best,
    Worst,
    Pooled,
}

#[derive(Clone, Copy, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// `start:stop:step` ranges and/or comma-separated budgets.
    #[arg(long, default_value = "35:180:5")]
    budgets: String,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "1,3,5,10")]
    ks: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: f64,
    #[arg(long, default_value_t = DEFAULT_GROUP_FRACTION)]
    fraction: f64,
    #[arg(long, value_enum, default_value = "paired")]
    pairing: PairingArg,
    /// How per-model impurity baselines are summarized.
    #[arg(long, value_enum, default_value = "mean")]
    gini: GiniArg,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
    /// Output directory for the report bundle.
    #[arg(long, env = OUTPUT_ENV)]
    out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn config(&self, methods: Vec<Method>) -> Result<ExperimentConfig> {
        let config = ExperimentConfig {
            budgets: parse_budgets(&self.budgets)?,
            repetitions: self.reps,
            methods,
            jaccard_ks: self.ks.clone(),
            cutoff: self.cutoff,
            fraction: self.fraction,
            base_seed: self.seed,
            pairing: match self.pairing {
                PairingArg::Paired => Pairing::Paired,
                PairingArg::Unpaired => Pairing::Unpaired,
            },
            gini: match self.gini {
                GiniArg::Mean => GiniAggregate::Mean,
                GiniArg::Best => GiniAggregate::Best,
                GiniArg::Worst => GiniAggregate::Worst,
                GiniArg::Pooled => GiniAggregate::Pooled,
            },
            reference: Method::Sds,
            timings: false,
        };
        config.validate()?;
        Ok(config)
    }

    fn out_dir(&self) -> Result<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| anyhow!("no output directory: pass --out or set {OUTPUT_ENV}"))
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// Defaults to all methods, or SDS and SRS when the dataset has no probabilities.
    #[arg(long, value_enum, value_delimiter = ',')]
    methods: Vec<MethodArg>,
}

#[derive(Subcommand)]
enum AblateCommand {
    /// SDS at several candidate-pool rates.
    Rate {
        #[command(flatten)]
        common: ExperimentArgs,
        #[arg(long, value_delimiter = ',')]
        rates: Vec<f64>,
    },
    /// Uniform draws within bands of the discrimination order.
    Interval {
        #[command(flatten)]
        common: ExperimentArgs,
        /// Band edges as fractions, e.g. `0,0.25,0.5,0.75,1`.
        #[arg(long, value_delimiter = ',')]
        edges: Vec<f64>,
    },
    /// Label-free vote ranking against the SDS budget curve.
    VoteRank {
        #[command(flatten)]
        common: ExperimentArgs,
    },
    /// SDS and SRS on subsets of the models spread over the accuracy range.
    FewerModels {
        #[command(flatten)]
        common: ExperimentArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<usize>,
    },
    /// Agreement of voted labels with the truth, by vote count.
    MatchedRate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, env = OUTPUT_ENV)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SynthArgs {
    /// Full generator spec as JSON; overrides the shape flags.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 25)]
    models: usize,
    #[arg(long, default_value_t = 10000)]
    samples: usize,
    #[arg(long, default_value_t = 10)]
    classes: usize,
    /// Lowest target accuracy.
    #[arg(long, default_value_t = 0.60)]
    low: f64,
    /// Highest target accuracy.
    #[arg(long, default_value_t = 0.95)]
    high: f64,
    #[arg(long)]
    hard_fraction: Option<f64>,
    #[arg(long)]
    hard_weight: Option<f64>,
    /// Probability a wrong prediction picks the sample's decoy class.
    #[arg(long)]
    decoy: Option<f64>,
    /// Probability a model sees the shared difficulty of a sample.
    #[arg(long)]
    shared: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "synthetic")]
    name: String,
    #[arg(long, env = OUTPUT_ENV)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Bundle directory or report.json.
    #[arg(long)]
    input: PathBuf,
    /// Write a fresh bundle here; otherwise print the summary.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = subcommand_name(&cli.command);
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let mut cmd = Cli::command();
            cmd.build();
            if let Some(sub) = cmd.find_subcommand_mut(name) {
                eprintln!("\n{}", sub.render_usage());
                eprintln!("For more information, try 'sds {name} --help'.");
            }
            ExitCode::FAILURE
        }
    }
}

fn subcommand_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Validate(_) => "validate",
        Command::Select(_) => "select",
        Command::Rank(_) => "rank",
        Command::Sweep(_) => "sweep",
        Command::Ablate(_) => "ablate",
        Command::Synth(_) => "synth",
        Command::Report(_) => "report",
    }
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Validate(a) => validate(&a),
        Command::Select(a) => select(&a).map(|_| ExitCode::SUCCESS),
        Command::Rank(a) => rank(&a).map(|_| ExitCode::SUCCESS),
        Command::Sweep(a) => match a.common.precision {
            Precision::F64 => sweep::<f64>(&a),
            Precision::F32 => sweep::<f32>(&a),
        }
        .map(|_| ExitCode::SUCCESS),
        Command::Ablate(a) => ablate(a).map(|_| ExitCode::SUCCESS),
        Command::Synth(a) => synth(&a).map(|_| ExitCode::SUCCESS),
        Command::Report(a) => report(&a).map(|_| ExitCode::SUCCESS),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn validate(a: &ValidateArgs) -> Result<ExitCode> {
    let parts = load_parts::<f64>(&a.manifest, LoadOptions::default())?;
    let report = parts.validate();
    println!(
        "{}: {} models, {} samples, {} classes, truth: {}, probabilities: {}",
        parts.manifest.name,
        parts.matrix.model_count(),
        parts.matrix.sample_count(),
        parts.labels.class_count(),
        match &parts.truth {
            None => "none".to_owned(),
            Some(t) => format!("{}/{} labeled", t.labels().iter().flatten().count(), t.len()),
        },
        if parts.probs.is_some() { "yes" } else { "no" },
    );
    println!("{report}");
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn select(a: &SelectArgs) -> Result<()> {
    let method = Method::from(a.method);
    let needs_probs = matches!(method, Method::Ddg | Method::Rdg);
    let opts = LoadOptions {
        skip_truth: true,
        skip_probabilities: !needs_probs,
    };
    let ds: Dataset<f64> = load_dataset(&a.manifest, opts)?;
    let budget = Budget::new(a.budget)?;
    let selection = match method {
        Method::Sds => SdsSelector::<f64>::new(&ds.matrix, &ds.labels, a.fraction)?.select(budget, a.cutoff, a.seed)?,
        Method::Srs => srs_select(ds.matrix.sample_count(), budget, a.seed)?,
        Method::Ddg | Method::Rdg => {
            let source = match &a.gini_model {
                Some(id) => GiniSource::Model(
                    ds.matrix
                        .model_ids()
                        .iter()
                        .position(|m| m == id)
                        .ok_or_else(|| anyhow!("unknown model id {id:?}"))?,
                ),
                None => GiniSource::Pooled,
            };
            let gini = gini_scores(ds.probs.as_ref(), source)?;
            if method == Method::Ddg {
                ddg_select(&gini, budget)?
            } else {
                rdg_select(&gini, budget, a.cutoff, a.seed)?
            }
        }
    };
    emit_selection(a, &ds, &selection.indices)
}

fn emit_selection(a: &SelectArgs, ds: &Dataset<f64>, indices: &[usize]) -> Result<()> {
    let mut out = String::new();
    for &j in indices {
        if a.ids {
            let _ = writeln!(out, "{}", ds.matrix.sample_ids()[j]);
        } else {
            let _ = writeln!(out, "{j}");
        }
    }
    emit(a.output.as_deref(), &out)
}

fn read_indices(path: &Path, m: usize) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (line, s) in text.lines().enumerate() {
        let s = s.trim();
        if s.is_empty() {
            continue;
        }
        let j: usize = s
            .parse()
            .map_err(|_| anyhow!("{}:{}: not a sample index: {s:?}", path.display(), line + 1))?;
        if j >= m {
            bail!("{}:{}: sample index {j} out of range (m = {m})", path.display(), line + 1);
        }
        out.push(j);
    }
    Ok(out)
}

fn rank(a: &RankArgs) -> Result<()> {
    let needs_truth = a.indices.is_some() || a.compare;
    let ds: Dataset<f64> = load_dataset(
        &a.manifest,
        LoadOptions {
            skip_truth: !needs_truth,
            skip_probabilities: true,
        },
    )?;
    let (truth, subset) = match (&a.labels, &a.indices) {
        (Some(labels), _) => {
            let manifest = DatasetManifest::read(&a.manifest)?;
            let truth = read_truth(labels, &manifest, &ds.matrix)?;
            let subset: Vec<usize> = (0..truth.len()).filter(|&j| truth.get(j).is_some()).collect();
            (truth, subset)
        }
        (None, Some(indices)) => {
            let subset = read_indices(indices, ds.matrix.sample_count())?;
            (ds.truth()?.reveal(&subset), subset)
        }
        (None, None) => bail!("pass --labels or --indices"),
    };
    let estimated = rank_by_accuracy::<f64>(&ds.matrix, &truth, &subset, RankingSource::Estimated)?;
    let mut out = String::from("model,accuracy,accuracy_value,rank\n");
    for i in 0..ds.matrix.model_count() {
        let acc = accuracy(&ds.matrix, i, &truth, &subset)?;
        let value = *acc.numer() as f64 / *acc.denom() as f64;
        let _ = writeln!(out, "{},{},{},{}", ds.matrix.model_ids()[i], acc, value, estimated.ranks[i]);
    }
    emit(a.output.as_deref(), &out)?;
    if a.compare {
        let all: Vec<usize> = (0..ds.matrix.sample_count()).collect();
        let actual = rank_by_accuracy::<f64>(&ds.matrix, ds.truth()?, &all, RankingSource::Actual)?;
        eprintln!("spearman {}", ranking_spearman(&estimated, &actual)?);
        for k in [1, 3, 5, 10].into_iter().filter(|&k| k <= actual.len()) {
            eprintln!("jaccard@{k} {}", jaccard_topk(&estimated, &actual, k)?);
        }
    }
    Ok(())
}

fn default_methods<T>(ds: &Dataset<T>, requested: &[MethodArg]) -> Vec<Method> {
    if !requested.is_empty() {
        return requested.iter().map(|&m| m.into()).collect();
    }
    if ds.probs.is_some() {
        Method::ALL.to_vec()
    } else {
        eprintln!("note: no probabilities in the manifest; running sds and srs only");
        vec![Method::Sds, Method::Srs]
    }
}

fn sweep<T>(a: &SweepArgs) -> Result<()>
where
    T: Scalar + serde::Serialize,
{
    let out = a.common.out_dir()?;
    let ds: Dataset<T> = load_dataset(&a.common.manifest, LoadOptions::default())?;
    let config = a.common.config(default_methods(&ds, &a.methods))?;
    let report = run_sweep(&ds, &config)?;
    let bundle = write_report(&report, out)?;
    eprintln!("wrote {}", bundle.summary.display());
    Ok(())
}

fn load_f64(manifest: &Path) -> Result<Dataset<f64>> {
    Ok(load_dataset(manifest, LoadOptions::default())?)
}

fn ablate(cmd: AblateCommand) -> Result<()> {
    match cmd {
        AblateCommand::Rate { common, rates } => {
            let out = common.out_dir()?;
            let ds = load_f64(&common.manifest)?;
            let rates = if rates.is_empty() { DEFAULT_RATES.to_vec() } else { rates };
            let config = common.config(vec![Method::Sds])?;
            let reports = sweep_selection_rate(&ds, &rates, &config)?;
            let mut table = String::from("rate,budget,spearman\n");
            for r in &reports {
                write_report(&r.report, &out.join(format!("rate-{}", r.rate)))?;
                for c in &r.report.cells {
                    let _ = writeln!(table, "{},{},{}", r.rate, c.budget, c.mean_spearman);
                }
            }
            write_table(out, "rates.csv", &table)
        }
        AblateCommand::Interval { common, edges } => {
            let out = common.out_dir()?;
            let ds = load_f64(&common.manifest)?;
            let bands: Vec<(f64, f64)> = if edges.is_empty() {
                QUARTILES.to_vec()
            } else {
                if edges.len() < 2 {
                    bail!("--edges needs at least two values");
                }
                edges.windows(2).map(|w| (w[0], w[1])).collect()
            };
            let config = common.config(vec![Method::Sds])?;
            let analysis = interval_analysis(&ds, &bands, &config)?;
            write_json(&analysis, &out_dir_created(out)?.join("interval.json"))?;
            let mut table = String::from("band,lower,upper,budget,spearman,p_value,delta,verdict\n");
            for (k, b) in analysis.bands.iter().enumerate() {
                for c in &b.report.cells {
                    let cmp = analysis
                        .comparisons
                        .iter()
                        .find(|x| x.band == k && x.budget == Some(c.budget));
                    let _ = write!(table, "{k},{},{},{},{}", b.lower, b.upper, c.budget, c.mean_spearman);
                    match cmp {
                        Some(x) => {
                            let _ = writeln!(table, ",{},{},{}", x.stats.p_value, x.stats.delta, x.stats.verdict);
                        }
                        None => table.push_str(",,,\n"),
                    }
                }
            }
            write_table(out, "bands.csv", &table)
        }
        AblateCommand::VoteRank { common } => {
            let out = common.out_dir()?;
            let ds = load_f64(&common.manifest)?;
            let config = common.config(vec![Method::Sds])?;
            let cmp = run_vote_rank_comparison(&ds, &config)?;
            write_json(&cmp, &out_dir_created(out)?.join("vote_rank.json"))?;
            let mut table = String::from("budget,sds_spearman,vote_spearman\n");
            for c in &cmp.sds.cells {
                let _ = writeln!(table, "{},{},{}", c.budget, c.mean_spearman, cmp.vote_spearman);
            }
            eprintln!(
                "vote ranking spearman {}; SDS exceeds it from budget {}",
                cmp.vote_spearman,
                cmp.crossing_budget.map_or("(never)".to_owned(), |b| b.to_string())
            );
            write_table(out, "vote_rank.csv", &table)
        }
        AblateCommand::FewerModels { common, counts } => {
            let out = common.out_dir()?;
            let ds = load_f64(&common.manifest)?;
            let config = common.config(vec![Method::Sds, Method::Srs])?;
            for count in counts {
                let models = spread_models(&ds, count)?;
                let report = run_fewer_models(&ds, &models, &config)?;
                write_report(&report, &out.join(format!("models-{count}")))?;
            }
            Ok(())
        }
        AblateCommand::MatchedRate { manifest, out } => {
            let ds = load_f64(&manifest)?;
            let rate = voting_match_rate(&ds)?;
            let mut table = String::from("votes,matched,total,rate\n");
            for (votes, b) in &rate.buckets {
                let _ = writeln!(table, "{votes},{},{},{}", b.matched, b.total, b.rate);
            }
            let _ = writeln!(table, "all,,,{}", rate.overall);
            match out {
                Some(dir) => write_table(&dir, "matched_rate.csv", &table),
                None => emit(None, &table),
            }
        }
    }
}

fn out_dir_created(dir: &Path) -> Result<&Path> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write_table(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = out_dir_created(dir)?.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn synth(a: &SynthArgs) -> Result<()> {
    let out = a
        .out
        .as_deref()
        .ok_or_else(|| anyhow!("no output directory: pass --out or set {OUTPUT_ENV}"))?;
    let spec = match &a.spec {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<SyntheticSpec>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => {
            let mut spec = SyntheticSpec::evenly_spaced(a.models, a.samples, a.classes, a.low, a.high, a.seed);
            if let Difficulty::TwoPoint {
                hard_fraction,
                hard_weight,
            } = &mut spec.difficulty
            {
                *hard_fraction = a.hard_fraction.unwrap_or(*hard_fraction);
                *hard_weight = a.hard_weight.unwrap_or(*hard_weight);
            }
            if let Some(c) = a.decoy {
                spec.error_labels = ErrorLabels::Decoy { concentration: c };
            }
            if let Some(s) = a.shared {
                spec.shared_difficulty = s;
            }
            spec
        }
    };
    let ds: Dataset<f64> = spec.generate()?;
    let names: Vec<String> = (0..spec.classes).map(|k| format!("c{k}")).collect();
    let path = write_dataset(&ds, &a.name, &names, out)?;
    fs::write(out.join("spec.json"), serde_json::to_string_pretty(&spec)? + "\n")?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn report(a: &ReportArgs) -> Result<()> {
    let report: TrialReport<f64> = read_report(&a.input)?;
    match &a.out {
        Some(dir) => {
            let bundle = write_report(&report, dir)?;
            eprintln!("wrote {}", bundle.summary.display());
        }
        None => print!("{}", render_summary(&report)),
    }
    Ok(())
}
