//! Acceptance suite. Prints one line per criterion and exits non-zero if
//! any criterion fails. Criteria 9-13 need the published benchmark dataset
//! in the standard CSV schema, located by `KSELECT_PUBLISHED_DATASET` or at
//! `data/published/dataset.csv`; they are skipped when it is absent.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Instant;

use kselect::cli::run;
use kselect::records::load_records;
use kselect::report::problem_features;
use kselect_core::clustering::{fit_regression_tree, hdbscan, kmeans, RegressionNode};
use kselect_core::codegen::{export_tree, parity_grid};
use kselect_core::config::{KernelConfig, ProblemSize};
use kselect_core::dataset::{build_matrix, normalize, normalize_rows, split, IncompletePolicy, PerformanceMatrix};
use kselect_core::decomposition::pca_fit_full;
use kselect_core::matrix::Matrix;
use kselect_core::pruning::{evaluate_selection, optimal_counts, prune, Method, PruneOptions, Selection};
use kselect_core::rng::Rng;
use kselect_core::selection_models::{evaluate_model, make_labels, train_model, Hyperparameters, ModelKind};
use kselect_core::synthetic::{canonical_spec, generate, SyntheticSpec};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

enum Status {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn workspace_root() -> PathBuf {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    root.canonicalize().unwrap_or(root)
}

fn matrix_from(spec: &SyntheticSpec) -> PerformanceMatrix {
    normalize(&build_matrix(&generate(spec), IncompletePolicy::Error).unwrap()).unwrap()
}

fn canonical() -> PerformanceMatrix {
    matrix_from(&canonical_spec())
}

/// Map `f` over `items` on scoped threads, keeping input order.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = thread::available_parallelism().map_or(4, |n| n.get()).min(items.len().max(1));
    let chunk = items.len().div_ceil(workers).max(1);
    thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    })
}

fn random_raw(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| 1e-3 + 1e3 * rng.next_f64()).collect())
}

fn perf_from_raw(raw: &Matrix) -> PerformanceMatrix {
    let problems = (0..raw.rows() as u64).map(|i| ProblemSize::new(i + 1, 1 + i % 5, 2 + i % 3).unwrap()).collect();
    PerformanceMatrix::new(problems, KernelConfig::all()[..raw.cols()].to_vec(), normalize_rows(raw).unwrap()).unwrap()
}

fn criterion_1() -> Outcome {
    let mut matrices = vec![canonical(), matrix_from(&SyntheticSpec { noise_sigma: 0.0, ..canonical_spec() })];
    let base = matrices[0].clone();
    for seed in 0..20 {
        let s = split(&base, 0.2, seed).unwrap();
        matrices.push(s.train);
        matrices.push(s.test);
    }
    let mut rng = Rng::new(1);
    for _ in 0..50 {
        let (r, c) = (2 + rng.below(30), 1 + rng.below(40));
        matrices.push(perf_from_raw(&random_raw(&mut rng, r, c)));
    }
    for (i, m) in matrices.iter().enumerate() {
        for (r, row) in m.values().iter_rows().enumerate() {
            let max = row.iter().cloned().fold(f64::MIN, f64::max);
            check(max == 1.0, || format!("matrix {i} row {r} max {max}"))?;
            check(row.iter().all(|&v| v > 0.0), || format!("matrix {i} row {r} has a non-positive entry"))?;
        }
        let again = normalize_rows(m.values()).unwrap();
        let same = again.as_slice().iter().zip(m.values().as_slice()).all(|(a, b)| a.to_bits() == b.to_bits());
        check(same, || format!("matrix {i} changes when normalized again"))?;
    }
    Ok(format!("{} matrices: row max 1.0, min > 0, idempotent", matrices.len()))
}

/// Naive double loop with a log-domain mean.
fn brute_force(selection: &[usize], m: &Matrix) -> f64 {
    let mut log_sum = 0.0;
    for r in 0..m.rows() {
        let mut best = f64::NEG_INFINITY;
        for &c in selection {
            if m[(r, c)] > best {
                best = m[(r, c)];
            }
        }
        log_sum += best.ln();
    }
    (log_sum / m.rows() as f64).exp()
}

fn criterion_2() -> Outcome {
    let mut rng = Rng::new(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (r, c) = (1 + rng.below(60), 1 + rng.below(50));
        let m = perf_from_raw(&random_raw(&mut rng, r, c));
        let mut cols: Vec<usize> = (0..c).collect();
        rng.shuffle(&mut cols);
        cols.truncate(1 + rng.below(c));
        let expected = brute_force(&cols, m.values());
        let sel = Selection { config_indices: cols, method: Method::TopCount, budget: c };
        let got = evaluate_selection(&sel, &m).unwrap().geomean_relative_performance;
        worst = worst.max(((got - expected) / expected).abs());
    }
    check(worst <= 1e-12, || format!("relative error {worst:e} > 1e-12"))?;
    Ok(format!("100 random matrices, worst relative error {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let m = canonical();
    let s = split(&m, 0.2, 42).unwrap();
    let features = problem_features(&s.train);
    let opts = PruneOptions::default();
    let results = par_map(&Method::ALL, |&method| -> Result<(), String> {
        for budget in 1..=15 {
            let sel = prune(method, &s.train, Some(&features), budget, 42, &opts).unwrap();
            for target in [&s.train, &s.test] {
                let base = evaluate_selection(&sel, target).unwrap();
                for c in (0..m.num_configs()).filter(|c| !sel.config_indices.contains(c)) {
                    let mut more = sel.clone();
                    more.config_indices.push(c);
                    let after = evaluate_selection(&more, target).unwrap();
                    check(after >= base, || format!("{method} budget {budget}: adding column {c} lowers the score"))?;
                }
            }
        }
        let full = prune(method, &s.train, Some(&features), m.num_configs(), 42, &opts).unwrap();
        for target in [&s.train, &s.test] {
            let score = evaluate_selection(&full, target).unwrap().percent();
            check(score == 100.0, || format!("{method} full selection scores {score}"))?;
        }
        Ok(())
    });
    results.into_iter().collect::<Result<Vec<()>, String>>()?;
    let mut last = 0.0;
    for budget in 1..=15 {
        let sel = prune(Method::TopCount, &s.train, None, budget, 42, &opts).unwrap();
        let score = evaluate_selection(&sel, &s.test).unwrap().percent();
        check(score >= last, || format!("top-count drops from {last} to {score} at budget {budget}"))?;
        last = score;
    }
    Ok("5 methods x budgets 1..15 monotone under additions; top-count non-decreasing; full selection 100%".into())
}

fn criterion_4() -> Outcome {
    let m = canonical();
    let model = pca_fit_full(m.values()).unwrap();
    let (_, back) = model.project_reconstruct(m.values()).unwrap();
    let err = back.as_slice().iter().zip(m.values().as_slice()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    check(err <= 1e-8, || format!("reconstruction error {err:e}"))?;
    let r = &model.explained_variance_ratio;
    check(r.windows(2).all(|w| w[0] >= w[1]), || "ratios increase somewhere".into())?;
    let total: f64 = r.iter().sum();
    check((total - 1.0).abs() <= 1e-9, || format!("ratios sum to {total}"))?;

    let mut rng = Rng::new(4);
    let direction: Vec<f64> = (0..12).map(|_| rng.standard_normal()).collect();
    let rows: Vec<Vec<f64>> = (0..30)
        .map(|_| {
            let t = rng.standard_normal();
            direction.iter().map(|d| 3.0 + t * d).collect()
        })
        .collect();
    let line = pca_fit_full(&Matrix::from_rows(&rows)).unwrap();
    let first = line.explained_variance_ratio[0];
    check(first == 1.0, || format!("collinear first ratio {first}"))?;
    Ok(format!("reconstruction error {err:.1e}, ratio sum 1{:+.1e}, collinear first ratio {first}", total - 1.0))
}

fn exhaustive_two_means(xs: &[f64]) -> f64 {
    let n = xs.len();
    let mut best = f64::INFINITY;
    for mask in 1..(1u32 << n) - 1 {
        let mut inertia = 0.0;
        for side in [0, 1] {
            let g: Vec<f64> = (0..n).filter(|&i| (mask >> i) & 1 == side).map(|i| xs[i]).collect();
            let mean = g.iter().sum::<f64>() / g.len() as f64;
            inertia += g.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        }
        best = best.min(inertia);
    }
    best
}

fn best_split_by_enumeration(xs: &[f64], ys: &[f64]) -> f64 {
    let sse = |g: Vec<f64>| {
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        g.iter().map(|y| (y - mean).powi(2)).sum::<f64>()
    };
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best = (f64::NAN, f64::INFINITY);
    for w in sorted.windows(2) {
        let t = (w[0] + w[1]) / 2.0;
        let left = xs.iter().zip(ys).filter(|(x, _)| **x < t).map(|(_, y)| *y).collect();
        let right = xs.iter().zip(ys).filter(|(x, _)| **x >= t).map(|(_, y)| *y).collect();
        let total = sse(left) + sse(right);
        if total < best.1 {
            best = (t, total);
        }
    }
    best.0
}

fn criterion_5() -> Outcome {
    let xs = [0.0, 0.1, 10.0, 10.1];
    let oracle = exhaustive_two_means(&xs);
    let km = kmeans(&Matrix::from_vec(4, 1, xs.to_vec()), 2, 42, 10).unwrap();
    check((km.inertia - oracle).abs() <= 1e-12 && (oracle - 0.01).abs() <= 1e-12, || {
        format!("k-means inertia {} vs oracle {oracle}", km.inertia)
    })?;

    let mut rng = Rng::new(5);
    let mut pts = Vec::new();
    for center in [0.0, 20.0] {
        for _ in 0..50 {
            pts.push([center + rng.standard_normal(), rng.standard_normal()]);
        }
    }
    let hd = hdbscan(&Matrix::from_rows(&pts), 5, 5).unwrap();
    let truth_ok = (0..100).all(|i| (hd.labels[i] == hd.labels[0]) == (i < 50));
    check(hd.num_clusters() == 2 && hd.noise_count() == 0 && truth_ok, || {
        format!("HDBSCAN found {} clusters, {} noise", hd.num_clusters(), hd.noise_count())
    })?;

    let (fx, fy) = ([1.0, 2.0, 10.0, 11.0], [0.0, 0.0, 1.0, 1.0]);
    let expected = best_split_by_enumeration(&fx, &fy);
    let tree =
        fit_regression_tree(&Matrix::from_vec(4, 1, fx.to_vec()), &Matrix::from_vec(4, 1, fy.to_vec()), 2).unwrap();
    let RegressionNode::Split { threshold, .. } = tree.nodes[0] else {
        return Err("regression tree did not split".into());
    };
    check(threshold == expected && expected == 6.0, || format!("threshold {threshold}, oracle {expected}"))?;
    Ok(format!("k-means inertia {:.4}, HDBSCAN 2 clusters / 0 noise, tree threshold {threshold}", km.inertia))
}

fn fast_hyper() -> Hyperparameters {
    Hyperparameters::default()
}

fn criterion_6() -> Outcome {
    let m = canonical();
    let seeds: Vec<u64> = (1..=20).collect();
    let results = par_map(&seeds, |&seed| -> Result<usize, String> {
        let s = split(&m, 0.2, seed).unwrap();
        let features = problem_features(&s.train);
        let mut pairs = 0;
        for method in Method::ALL {
            for budget in [5, 15] {
                let sel = prune(method, &s.train, Some(&features), budget, seed, &PruneOptions::default()).unwrap();
                let labeled = make_labels(&s.train, &sel).unwrap();
                let ceiling = evaluate_selection(&sel, &s.test).unwrap();
                for kind in ModelKind::GRID {
                    let model = train_model(kind, &labeled, &fast_hyper(), seed).unwrap();
                    let got = evaluate_model(&model, &s.test).unwrap();
                    check(got <= ceiling, || {
                        format!("split {seed}: {kind} on {method}/{budget} scores {got} > {ceiling}")
                    })?;
                    pairs += 1;
                }
                let one_nn = train_model(ModelKind::Knn { k: 1 }, &labeled, &fast_hyper(), seed).unwrap();
                let own = evaluate_model(&one_nn, &s.train).unwrap();
                let best = evaluate_selection(&sel, &s.train).unwrap();
                check(own == best, || format!("split {seed}: 1-NN training score {own} != {best}"))?;
            }
        }
        Ok(pairs)
    });
    let pairs: usize = results.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter().sum();
    Ok(format!("20 splits, {pairs} (model, selection) pairs under the ceiling; 1-NN reaches it on training data"))
}

fn criterion_7() -> Outcome {
    let m = canonical();
    let grid = parity_grid();
    let mut checked = 0usize;
    for seed in [42, 7] {
        let s = split(&m, 0.2, seed).unwrap();
        let features = problem_features(&s.train);
        for budget in [5, 6, 8, 15] {
            let sel =
                prune(Method::DecisionTree, &s.train, Some(&features), budget, seed, &PruneOptions::default()).unwrap();
            let model =
                train_model(ModelKind::DecisionTree, &make_labels(&s.train, &sel).unwrap(), &fast_hyper(), seed)
                    .unwrap();
            let doc = export_tree(&model).unwrap();
            let bad = grid.iter().filter(|p| doc.traverse(p) != model.predict(p)).count();
            check(bad == 0, || format!("seed {seed} budget {budget}: {bad} mismatches"))?;
            checked += grid.len();
        }
    }
    Ok(format!("{} grid points per tree, {checked} comparisons, zero mismatches", grid.len()))
}

fn pipeline(dir: &Path) -> Result<(), String> {
    let spec = workspace_root().join("data/canonical_spec.json");
    let p = |name: &str| dir.join(name).to_str().unwrap().to_string();
    let steps: Vec<Vec<String>> = vec![
        vec!["synth".into(), "--spec".into(), spec.to_str().unwrap().into(), "--out".into(), p("data.csv")],
        vec![
            "prune".into(),
            "--data".into(),
            p("data.csv"),
            "--budget".into(),
            "8".into(),
            "--out".into(),
            p("selection.json"),
        ],
        vec![
            "train".into(),
            "--data".into(),
            p("data.csv"),
            "--selection".into(),
            p("selection.json"),
            "--out".into(),
            p("model.json"),
            "--tree-out".into(),
            p("tree.json"),
        ],
        vec![
            "codegen".into(),
            "--model".into(),
            p("model.json"),
            "--out".into(),
            p("selector.h"),
            "--reference-out".into(),
            p("reference.csv"),
        ],
        vec!["report".into(), "--data".into(), p("data.csv"), "--out-dir".into(), p("report")],
    ];
    for step in steps {
        let code = run(std::iter::once("kselect".to_string()).chain(step.iter().cloned()));
        check(code == 0, || format!("`{}` exited with {code}", step[0]))?;
    }
    Ok(())
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(files_under(&path));
        } else {
            out.push(path);
        }
    }
    out.sort();
    out
}

fn criterion_8() -> Outcome {
    let shipped: SyntheticSpec =
        kselect::documents::read_json(&workspace_root().join("data/canonical_spec.json")).unwrap();
    check(shipped == canonical_spec(), || "shipped canonical spec differs from the built-in one".into())?;
    let (a, b) = (tempfile::TempDir::new().unwrap(), tempfile::TempDir::new().unwrap());
    pipeline(a.path())?;
    pipeline(b.path())?;
    let (fa, fb) = (files_under(a.path()), files_under(b.path()));
    let rel = |f: &Vec<PathBuf>, root: &Path| {
        f.iter().map(|p| p.strip_prefix(root).unwrap().to_path_buf()).collect::<Vec<_>>()
    };
    check(rel(&fa, a.path()) == rel(&fb, b.path()), || "runs produced different file sets".into())?;
    for (x, y) in fa.iter().zip(&fb) {
        check(fs::read(x).unwrap() == fs::read(y).unwrap(), || format!("{} differs between runs", x.display()))?;
    }
    Ok(format!("{} artifacts byte-identical across two runs", fa.len()))
}

fn published_path() -> PathBuf {
    std::env::var_os("KSELECT_PUBLISHED_DATASET")
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace_root().join("data/published/dataset.csv"))
}

fn published() -> Result<PerformanceMatrix, String> {
    let records = load_records(&published_path()).map_err(|e| e.to_string())?;
    let grid = build_matrix(&records, IncompletePolicy::Error).map_err(|e| e.to_string())?;
    normalize(&grid).map_err(|e| e.to_string())
}

const PAPER_BUDGETS: [usize; 4] = [5, 6, 8, 15];
const SPLIT_SEEDS: std::ops::Range<u64> = 0..10;

/// Mean test score over the ten splits for each method and budget.
fn mean_pruning_scores(m: &PerformanceMatrix, budgets: &[usize]) -> Vec<(Method, usize, f64)> {
    let seeds: Vec<u64> = SPLIT_SEEDS.collect();
    let per_seed = par_map(&seeds, |&seed| {
        let s = split(m, 0.2, seed).unwrap();
        let features = problem_features(&s.train);
        let mut out = Vec::new();
        for method in Method::ALL {
            for &b in budgets {
                let sel = prune(method, &s.train, Some(&features), b, seed, &PruneOptions::default()).unwrap();
                out.push(evaluate_selection(&sel, &s.test).unwrap().percent());
            }
        }
        out
    });
    let mut result = Vec::new();
    for (mi, method) in Method::ALL.iter().enumerate() {
        for (bi, &b) in budgets.iter().enumerate() {
            let idx = mi * budgets.len() + bi;
            let mean = per_seed.iter().map(|v| v[idx]).sum::<f64>() / per_seed.len() as f64;
            result.push((*method, b, mean));
        }
    }
    result
}

fn criterion_9(m: &PerformanceMatrix) -> Outcome {
    let counts = optimal_counts(m);
    let distinct = counts.iter().filter(|&&c| c > 0).count();
    let most = counts.iter().copied().max().unwrap_or(0);
    check(distinct == 58 && most == 32, || {
        format!("{distinct} distinct optimal configs, most frequent wins {most} (want 58, 32)")
    })?;
    Ok(format!("{distinct} distinct optimal configs, most frequent wins {most}"))
}

fn criterion_10(m: &PerformanceMatrix) -> Outcome {
    let model = pca_fit_full(m.values()).unwrap();
    let mut found = Vec::new();
    for (t, want) in [(0.80, 4usize), (0.90, 8), (0.95, 15)] {
        let r = model.components_for_threshold(t).map_err(|e| e.to_string())?;
        found.push(format!("{:.0}%: {r}", t * 100.0));
        check(r.abs_diff(want) <= 1, || format!("{:.0}% variance needs {r} components, want {want} +- 1", t * 100.0))?;
    }
    Ok(found.join(", "))
}

fn criterion_11(scores: &[(Method, usize, f64)]) -> Outcome {
    let mut found = Vec::new();
    for (b, want) in PAPER_BUDGETS.iter().zip([92.99, 94.98, 95.37, 96.61]) {
        let got = scores.iter().find(|(m, bb, _)| *m == Method::DecisionTree && bb == b).unwrap().2;
        found.push(format!("{b}: {got:.2}"));
        check((got - want).abs() <= 1.5, || format!("budget {b}: {got:.2} vs {want} +- 1.5"))?;
    }
    Ok(found.join(", "))
}

fn criterion_12(m: &PerformanceMatrix) -> Outcome {
    let seeds: Vec<u64> = SPLIT_SEEDS.collect();
    let per_seed = par_map(&seeds, |&seed| {
        let s = split(m, 0.2, seed).unwrap();
        let features = problem_features(&s.train);
        PAPER_BUDGETS
            .iter()
            .map(|&b| {
                let sel =
                    prune(Method::DecisionTree, &s.train, Some(&features), b, seed, &PruneOptions::default()).unwrap();
                let labeled = make_labels(&s.train, &sel).unwrap();
                let score = |kind| {
                    let model = train_model(kind, &labeled, &Hyperparameters::default(), seed).unwrap();
                    evaluate_model(&model, &s.test).unwrap().percent()
                };
                (score(ModelKind::DecisionTree), score(ModelKind::RbfSvm))
            })
            .collect::<Vec<_>>()
    });
    let n = per_seed.len() as f64;
    let mut found = Vec::new();
    let mut failures = Vec::new();
    for (bi, (b, want)) in PAPER_BUDGETS.iter().zip([86.43, 84.29, 86.82, 83.54]).enumerate() {
        let tree = per_seed.iter().map(|v| v[bi].0).sum::<f64>() / n;
        let rbf = per_seed.iter().map(|v| v[bi].1).sum::<f64>() / n;
        found.push(format!("{b}: tree {tree:.2} rbf {rbf:.2}"));
        if (tree - want).abs() > 5.0 {
            failures.push(format!("budget {b}: tree {tree:.2} vs {want} +- 5"));
        }
        if !(50.0..=62.0).contains(&rbf) {
            failures.push(format!("budget {b}: rbf-svm {rbf:.2} outside 50-62"));
        }
    }
    if failures.is_empty() {
        Ok(found.join(", "))
    } else {
        Err(format!("{} ({})", failures.join("; "), found.join(", ")))
    }
}

fn criterion_13(scores: &[(Method, usize, f64)]) -> Outcome {
    for b in 6..=15 {
        let at = |method| scores.iter().find(|(m, bb, _)| *m == method && *bb == b).unwrap().2;
        let tree = at(Method::DecisionTree);
        for other in Method::ALL.into_iter().filter(|&m| m != Method::DecisionTree) {
            let o = at(other);
            check(tree >= o - 1.0, || format!("budget {b}: decision-tree {tree:.2} < {other} {o:.2} - 1"))?;
        }
    }
    Ok("decision-tree within 1 point of the best method at every budget 6..15".into())
}

fn evaluate(f: impl FnOnce() -> Outcome) -> Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(detail)) => Status::Pass(detail),
        Ok(Err(detail)) => Status::Fail(detail),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Status::Fail(format!("panic: {msg}"))
        }
    }
}

fn main() {
    // Honour `cargo test -- <filter>` loosely: any filter that does not
    // mention acceptance skips the suite.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str()) || a.contains("acceptance")) {
        return;
    }
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }

    let start = Instant::now();
    let mut results: Vec<(u32, &str, Status)> = Vec::new();
    let core: [Criterion; 8] = [
        (1, "normalization", criterion_1),
        (2, "metric oracle", criterion_2),
        (3, "monotonicity", criterion_3),
        (4, "PCA properties", criterion_4),
        (5, "clustering oracles", criterion_5),
        (6, "classifier ceiling", criterion_6),
        (7, "codegen parity", criterion_7),
        (8, "pipeline determinism", criterion_8),
    ];
    for (id, name, f) in core {
        results.push((id, name, evaluate(f)));
    }

    let path = published_path();
    let names = [
        (9, "optimal-count histogram"),
        (10, "PCA dimensioning"),
        (11, "pruning quality"),
        (12, "classifier grid"),
        (13, "pruning method ranking"),
    ];
    if !path.is_file() {
        for (id, name) in names {
            let why = format!("published dataset not found at {} (set KSELECT_PUBLISHED_DATASET)", path.display());
            results.push((id, name, Status::Skip(why)));
        }
    } else {
        match published() {
            Err(e) => {
                for (id, name) in names {
                    results.push((id, name, Status::Fail(format!("cannot load {}: {e}", path.display()))));
                }
            }
            Ok(m) => {
                let budgets: Vec<usize> = (5..=15).collect();
                let scores = catch_unwind(AssertUnwindSafe(|| mean_pruning_scores(&m, &budgets)));
                results.push((9, names[0].1, evaluate(|| criterion_9(&m))));
                results.push((10, names[1].1, evaluate(|| criterion_10(&m))));
                match &scores {
                    Ok(s) => {
                        results.push((11, names[2].1, evaluate(|| criterion_11(s))));
                        results.push((12, names[3].1, evaluate(|| criterion_12(&m))));
                        results.push((13, names[4].1, evaluate(|| criterion_13(s))));
                    }
                    Err(_) => {
                        results.push((11, names[2].1, Status::Fail("pruning panicked".into())));
                        results.push((12, names[3].1, evaluate(|| criterion_12(&m))));
                        results.push((13, names[4].1, Status::Fail("pruning panicked".into())));
                    }
                }
            }
        }
    }

    let mut failed = 0;
    for (id, name, status) in &results {
        let (tag, detail) = match status {
            Status::Pass(d) => ("PASS", d),
            Status::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Status::Skip(d) => ("SKIP", d),
        };
        println!("criterion {id:>2} {tag} {name}: {detail}");
    }
    println!("acceptance: {} criteria, {failed} failed, {:.1}s", results.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
