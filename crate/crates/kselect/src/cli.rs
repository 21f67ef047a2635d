//! The `kselect` command line.
//!
//! Exit codes: 0 on success, 1 for usage and I/O problems, 2 when input
//! data fails validation.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use kselect_core::codegen::{emit_selector_source, export_tree, parity_grid, TreeDocument};
use kselect_core::config::ProblemSize;
use kselect_core::dataset::{build_matrix, normalize, split, DataSplit, IncompletePolicy, PerformanceMatrix};
use kselect_core::decomposition::pca_fit_full;
use kselect_core::pruning::{evaluate_selection, optimal_counts, prune, Method, PruneOptions};
use kselect_core::selection_models::{
    evaluate_model, make_labels, train_model, Hyperparameters, ModelKind, SelectorModel,
};
use kselect_core::synthetic::{canonical_spec, generate, SyntheticSpec};
use serde::Serialize;

use crate::documents::{check_model, check_spec, check_tree, read_json, to_json, write_json, SelectionDocument};
use crate::records::{load_records, write_records, LoadError};
use crate::reference::{predictions, read_predictions, write_predictions};
use crate::report::{
    classifier_grid, problem_features, pruning_curves, write_curves, write_grid, write_histogram, write_variance,
    ExperimentSetup,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(_) => EXIT_DATA,
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

trait Classify<T> {
    fn usage(self) -> Outcome<T>;
    fn data(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Outcome<T> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
    fn data(self) -> Outcome<T> {
        self.map_err(|e| Failure::Data(e.into()))
    }
}

#[derive(Debug, Parser)]
#[command(name = "kselect", version, about = "Prune kernel configurations and build runtime selectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a benchmark CSV from the analytic performance model.
    Synth(SynthArgs),
    /// Check a benchmark CSV and print a summary.
    Validate(DataArgs),
    /// Explained-variance table of the performance matrix.
    Pca(PcaArgs),
    /// Choose a budgeted set of configurations on the training split.
    Prune(PruneArgs),
    /// Train a runtime selector over a pruned selection.
    Train(TrainArgs),
    /// Score a trained selector on the test split.
    Evaluate(EvaluateArgs),
    /// Emit a decision-tree selector as C source.
    Codegen(CodegenArgs),
    /// Write plot-ready report tables.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Benchmark CSV.
    #[arg(long)]
    data: PathBuf,
    /// Drop problems lacking a measurement instead of failing.
    #[arg(long)]
    drop_incomplete: bool,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.2, value_parser = parse_fraction)]
    test_fraction: f64,
}

#[derive(Debug, Args)]
struct PruneTuning {
    /// Variance fraction kept before PCA + k-means clustering.
    #[arg(long, default_value_t = 0.90, value_parser = parse_fraction_inclusive)]
    pca_variance: f64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    kmeans_restarts: u64,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..))]
    hdbscan_min_cluster_size: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    hdbscan_min_samples: u64,
    /// Do not top up short selections with the most frequently optimal configs.
    #[arg(long)]
    no_backfill: bool,
}

impl PruneTuning {
    fn options(&self) -> PruneOptions {
        PruneOptions {
            backfill: !self.no_backfill,
            pca_variance_threshold: self.pca_variance,
            kmeans_restarts: self.kmeans_restarts as usize,
            hdbscan_min_cluster_size: self.hdbscan_min_cluster_size as usize,
            hdbscan_min_samples: self.hdbscan_min_samples as usize,
        }
    }
}

#[derive(Debug, Args)]
struct HyperArgs {
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    trees: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=3))]
    max_features: u64,
    #[arg(long)]
    no_bootstrap: bool,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    svm_c: f64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    epochs: u64,
    /// RBF kernel width; defaults to 1 / (3 * variance of scaled features).
    #[arg(long, value_parser = parse_positive)]
    gamma: Option<f64>,
}

impl HyperArgs {
    fn hyperparameters(&self) -> Hyperparameters {
        Hyperparameters {
            forest_trees: self.trees as usize,
            forest_max_features: self.max_features as usize,
            forest_bootstrap: !self.no_bootstrap,
            svm_c: self.svm_c,
            linear_epochs: self.epochs as usize,
            rbf_gamma: self.gamma,
            ..Hyperparameters::default()
        }
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Spec JSON; the canonical spec when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Replace the spec's problems with this many sampled shapes.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    problems: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_non_negative)]
    noise: Option<f64>,
    #[arg(long, value_parser = parse_positive)]
    peak: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Also write the effective spec JSON here.
    #[arg(long)]
    write_spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PcaArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Variance table CSV; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PruneArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    split: SplitArgs,
    #[arg(long, default_value = "decision-tree")]
    method: Method,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    #[command(flatten)]
    tuning: PruneTuning,
    /// Selection JSON; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    split: SplitArgs,
    /// Selection JSON written by `prune`.
    #[arg(long)]
    selection: PathBuf,
    #[arg(long, default_value = "decision-tree")]
    model: ModelKind,
    #[command(flatten)]
    hyper: HyperArgs,
    /// Model JSON.
    #[arg(long)]
    out: PathBuf,
    /// Also export a decision tree as a tree document.
    #[arg(long)]
    tree_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    split: SplitArgs,
    /// Model JSON written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// Scores JSON; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CodegenArgs {
    /// Decision-tree model JSON written by `train`.
    #[arg(long, conflicts_with = "tree", required_unless_present = "tree")]
    model: Option<PathBuf>,
    /// Tree document JSON.
    #[arg(long)]
    tree: Option<PathBuf>,
    #[arg(long, default_value = "kselect_select")]
    symbol: String,
    /// C source output.
    #[arg(long)]
    out: PathBuf,
    /// Also write this tree's predictions as a reference CSV.
    #[arg(long)]
    reference_out: Option<PathBuf>,
    /// Problem shapes for the reference CSV (columns m,k,n and optionally
    /// more); the built-in parity grid when omitted.
    #[arg(long, requires = "reference_out")]
    problems: Option<PathBuf>,
    /// Also write the tree document.
    #[arg(long)]
    tree_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    split: SplitArgs,
    #[arg(long)]
    out_dir: PathBuf,
    /// Optimal-count histogram (histogram.csv).
    #[arg(long)]
    histogram: bool,
    /// Score versus budget per pruning method (curves.csv).
    #[arg(long)]
    curves: bool,
    /// PCA explained variance (variance.csv).
    #[arg(long)]
    variance: bool,
    /// Classifier scores per budget (classifiers.csv).
    #[arg(long)]
    classifiers: bool,
    /// Budgets as `a..b` (inclusive) or a comma list.
    #[arg(long, default_value = "4..15", value_parser = parse_budgets)]
    budgets: Budgets,
    #[arg(long, value_delimiter = ',')]
    methods: Vec<Method>,
    #[arg(long, value_delimiter = ',')]
    models: Vec<ModelKind>,
    /// Number of split seeds to average over, starting at --seed.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    splits: u64,
    #[command(flatten)]
    tuning: PruneTuning,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Debug, Clone)]
struct Budgets(Vec<usize>);

fn parse_budgets(text: &str) -> Result<Budgets, String> {
    let parse = |s: &str| -> Result<usize, String> {
        match s.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("`{s}` is not a positive budget")),
            Ok(v) => Ok(v),
        }
    };
    let list = if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (parse(a)?, parse(b)?);
        if a > b {
            return Err(format!("empty budget range `{text}`"));
        }
        (a..=b).collect()
    } else {
        text.split(',').map(parse).collect::<Result<Vec<_>, _>>()?
    };
    Ok(Budgets(list))
}

fn parse_fraction(text: &str) -> Result<f64, String> {
    match text.parse::<f64>() {
        Ok(v) if v > 0.0 && v < 1.0 => Ok(v),
        _ => Err(format!("`{text}` is not a fraction strictly between 0 and 1")),
    }
}

fn parse_fraction_inclusive(text: &str) -> Result<f64, String> {
    match text.parse::<f64>() {
        Ok(v) if v > 0.0 && v <= 1.0 => Ok(v),
        _ => Err(format!("`{text}` is not a fraction in (0, 1]")),
    }
}

fn parse_positive(text: &str) -> Result<f64, String> {
    match text.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{text}` is not a positive number")),
    }
}

fn parse_non_negative(text: &str) -> Result<f64, String> {
    match text.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{text}` is not a non-negative number")),
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let (Failure::Usage(e) | Failure::Data(e)) = &failure;
            eprintln!("error: {e:#}");
            failure.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Synth(a) => synth(a),
        Command::Validate(a) => validate(a),
        Command::Pca(a) => pca(a),
        Command::Prune(a) => prune_cmd(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Codegen(a) => codegen(a),
        Command::Report(a) => report(a),
    }
}

fn load_matrix(args: &DataArgs) -> Outcome<PerformanceMatrix> {
    let records = load_records(&args.data).map_err(|e| match e {
        LoadError::Io { .. } => Failure::Usage(e.into()),
        other => Failure::Data(anyhow!(other).context(format!("{}", args.data.display()))),
    })?;
    let policy = if args.drop_incomplete { IncompletePolicy::DropProblem } else { IncompletePolicy::Error };
    let grid = build_matrix(&records, policy)
        .map_err(anyhow::Error::from)
        .with_context(|| format!("{} (pass --drop-incomplete to skip incomplete problems)", args.data.display()))
        .data()?;
    normalize(&grid).with_context(|| args.data.display().to_string()).data()
}

fn load_split(data: &DataArgs, s: &SplitArgs) -> Outcome<DataSplit> {
    let m = load_matrix(data)?;
    split(&m, s.test_fraction, s.seed).context("--test-fraction leaves one side of the split empty").data()
}

fn read_doc<T: serde::de::DeserializeOwned>(path: &Path) -> Outcome<T> {
    if !path.is_file() {
        return Err(Failure::Usage(anyhow!("cannot read {}", path.display())));
    }
    read_json(path).data()
}

fn create(path: &Path) -> Outcome<BufWriter<File>> {
    File::create(path).with_context(|| format!("cannot write {}", path.display())).map(BufWriter::new).usage()
}

/// Write through `f` to `path`, or to stdout when `path` is `None`.
fn emit(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Outcome {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w).and_then(|()| w.flush()).with_context(|| format!("cannot write {}", p.display())).usage()
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).context("cannot write to stdout").usage()
        }
    }
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Outcome {
    match path {
        Some(p) => write_json(p, value).usage(),
        None => emit(None, |w| w.write_all(to_json(value).as_bytes())),
    }
}

fn synth(a: SynthArgs) -> Outcome {
    let mut spec: SyntheticSpec = match &a.spec {
        Some(p) => read_doc(p)?,
        None => canonical_spec(),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    if let Some(n) = a.problems {
        spec.problems = kselect_core::synthetic::sample_problems(n as usize, spec.seed);
    }
    if let Some(noise) = a.noise {
        spec.noise_sigma = noise;
    }
    if let Some(peak) = a.peak {
        spec.peak_gflops = peak;
    }
    check_spec(&spec).data()?;
    let records = generate(&spec);
    emit(Some(&a.out), |w| write_records(w, &records))?;
    if let Some(p) = &a.write_spec {
        write_json(p, &spec).usage()?;
    }
    eprintln!("wrote {} records for {} problems to {}", records.len(), spec.problems.len(), a.out.display());
    Ok(())
}

fn validate(a: DataArgs) -> Outcome {
    let m = load_matrix(&a)?;
    let counts = optimal_counts(&m);
    let distinct = counts.iter().filter(|&&c| c > 0).count();
    let most = counts.iter().copied().max().unwrap_or(0);
    println!(
        "ok: {} problems x {} configs; {} configs optimal at least once; most frequent optimum wins {} times",
        m.num_problems(),
        m.num_configs(),
        distinct,
        most
    );
    Ok(())
}

fn pca(a: PcaArgs) -> Outcome {
    let m = load_matrix(&a.data)?;
    let model = pca_fit_full(m.values()).data()?;
    for t in [0.80, 0.90, 0.95] {
        match model.components_for_threshold(t) {
            Ok(r) => eprintln!("{:.0}% variance: {r} components", t * 100.0),
            Err(_) => eprintln!("{:.0}% variance: not reached", t * 100.0),
        }
    }
    emit(a.out.as_deref(), |w| write_variance(w, &model))
}

fn prune_cmd(a: PruneArgs) -> Outcome {
    let s = load_split(&a.data, &a.split)?;
    let features = problem_features(&s.train);
    let selection =
        prune(a.method, &s.train, Some(&features), a.budget as usize, a.split.seed, &a.tuning.options()).data()?;
    let train_score = evaluate_selection(&selection, &s.train).data()?;
    let test_score = evaluate_selection(&selection, &s.test).data()?;
    eprintln!("{}: {} configs, train {train_score}, test {test_score}", a.method, selection.len());
    emit_json(a.out.as_deref(), &SelectionDocument::new(&selection, &s.train, a.split.seed))
}

fn train(a: TrainArgs) -> Outcome {
    let s = load_split(&a.data, &a.split)?;
    let doc: SelectionDocument = read_doc(&a.selection)?;
    let selection = doc.resolve(&s.train).data()?;
    let labeled = make_labels(&s.train, &selection).data()?;
    let model = train_model(a.model, &labeled, &a.hyper.hyperparameters(), a.split.seed).data()?;
    write_json(&a.out, &model).usage()?;
    if let Some(p) = &a.tree_out {
        let tree = export_tree(&model).context("--tree-out").usage()?;
        write_json(p, &tree).usage()?;
    }
    let score = evaluate_model(&model, &s.test).data()?;
    eprintln!("{}: test {score}", a.model);
    Ok(())
}

#[derive(Debug, Serialize)]
struct Scores {
    model: String,
    train_score: f64,
    test_score: f64,
    selection_test_score: f64,
}

fn load_model(path: &Path) -> Outcome<SelectorModel> {
    let model: SelectorModel = read_doc(path)?;
    check_model(&model).with_context(|| path.display().to_string()).data()?;
    Ok(model)
}

fn evaluate(a: EvaluateArgs) -> Outcome {
    let s = load_split(&a.data, &a.split)?;
    let model = load_model(&a.model)?;
    let scores = Scores {
        model: model.kind.to_string(),
        train_score: evaluate_model(&model, &s.train).data()?.percent(),
        test_score: evaluate_model(&model, &s.test).data()?.percent(),
        selection_test_score: evaluate_selection(&model.selection, &s.test).data()?.percent(),
    };
    emit_json(a.out.as_deref(), &scores)
}

fn read_problems(path: &Path) -> Outcome<Vec<ProblemSize>> {
    let file = File::open(path).with_context(|| format!("cannot read {}", path.display())).usage()?;
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header = csv.headers().data()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Failure::Data(anyhow!("{} is missing column `{name}`", path.display())))
    };
    let idx = [col("m")?, col("k")?, col("n")?];
    let mut out = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let rec = rec.data()?;
        let d: Vec<u64> = idx
            .iter()
            .map(|&c| rec.get(c).unwrap_or("").parse::<u64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("{} row {}", path.display(), i + 1))
            .data()?;
        let p =
            ProblemSize::new(d[0], d[1], d[2]).with_context(|| format!("{} row {}", path.display(), i + 1)).data()?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

fn codegen(a: CodegenArgs) -> Outcome {
    let doc: TreeDocument = match (&a.model, &a.tree) {
        (Some(p), _) => {
            let model = load_model(p)?;
            export_tree(&model).context("--model").usage()?
        }
        (None, Some(p)) => {
            let doc: TreeDocument = read_doc(p)?;
            check_tree(&doc).data()?;
            doc
        }
        (None, None) => unreachable!("clap requires one of --model and --tree"),
    };
    let source = emit_selector_source(&doc, &a.symbol).context("--symbol").usage()?;
    fs::write(&a.out, source).with_context(|| format!("cannot write {}", a.out.display())).usage()?;
    if let Some(p) = &a.tree_out {
        write_json(p, &doc).usage()?;
    }
    if let Some(p) = &a.reference_out {
        let problems = match &a.problems {
            Some(path) => read_problems(path)?,
            None => parity_grid(),
        };
        let rows = predictions(&problems, |q| doc.traverse(q));
        emit(Some(p), |w| write_predictions(w, &rows))?;
    }
    Ok(())
}

fn report(a: ReportArgs) -> Outcome {
    let m = load_matrix(&a.data)?;
    let all = !(a.histogram || a.curves || a.variance || a.classifiers);
    fs::create_dir_all(&a.out_dir).with_context(|| format!("cannot create {}", a.out_dir.display())).usage()?;
    let setup = ExperimentSetup { seed: a.split.seed, test_fraction: a.split.test_fraction, splits: a.splits as usize };
    let out = |name: &str| a.out_dir.join(name);
    if all || a.histogram {
        emit(Some(&out("histogram.csv")), |w| write_histogram(w, &m))?;
    }
    if all || a.variance {
        let model = pca_fit_full(m.values()).data()?;
        emit(Some(&out("variance.csv")), |w| write_variance(w, &model))?;
    }
    if all || a.curves {
        let methods = if a.methods.is_empty() { Method::ALL.to_vec() } else { a.methods.clone() };
        let points = pruning_curves(&m, &methods, &a.budgets.0, &setup, &a.tuning.options()).data()?;
        emit(Some(&out("curves.csv")), |w| write_curves(w, &points))?;
    }
    if all || a.classifiers {
        let kinds = if a.models.is_empty() { ModelKind::GRID.to_vec() } else { a.models.clone() };
        let cells = classifier_grid(&m, &kinds, &a.budgets.0, &setup, &a.tuning.options(), &a.hyper.hyperparameters())
            .data()?;
        emit(Some(&out("classifiers.csv")), |w| write_grid(w, &cells))?;
    }
    Ok(())
}

/// Compare a reference CSV against a tree document; returns the number of
/// mismatching rows.
pub fn count_reference_mismatches(doc: &TreeDocument, reference: &Path) -> anyhow::Result<usize> {
    let rows = read_predictions(File::open(reference)?)?;
    Ok(rows.iter().filter(|r| doc.traverse(&r.problem) != r.config).count())
}
