//! Plot-ready report tables.

use std::io::{self, Write};

use anyhow::Result;
use kselect_core::dataset::{split, PerformanceMatrix};
use kselect_core::decomposition::PcaModel;
use kselect_core::matrix::Matrix;
use kselect_core::pruning::{evaluate_selection, optimal_counts, prune, Method, PruneOptions};
use kselect_core::selection_models::{
    evaluate_model, log_features, make_labels, train_model, Hyperparameters, ModelKind,
};

/// Features used by the decision-tree pruning method for a matrix.
pub fn problem_features(matrix: &PerformanceMatrix) -> Matrix {
    let rows: Vec<[f64; 3]> = matrix.problems().iter().map(log_features).collect();
    if rows.is_empty() {
        Matrix::zeros(0, 3)
    } else {
        Matrix::from_rows(&rows)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExperimentSetup {
    pub seed: u64,
    pub test_fraction: f64,
    /// Split seeds are `seed, seed + 1, ...`; scores are averaged.
    pub splits: usize,
}

impl ExperimentSetup {
    pub fn split_seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.splits.max(1) as u64).map(|i| self.seed.wrapping_add(i))
    }
}

/// Rows sorted by count (descending) then canonical column, zero counts
/// omitted.
pub fn write_histogram<W: Write>(writer: W, matrix: &PerformanceMatrix) -> io::Result<()> {
    let counts = optimal_counts(matrix);
    let mut order: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] > 0).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["rank", "acc", "row_tile", "col_tile", "wg_rows", "wg_cols", "optimal_count"])?;
    for (rank, &c) in order.iter().enumerate() {
        let mut fields = vec![(rank + 1).to_string()];
        fields.extend(matrix.configs()[c].as_tuple().iter().map(u32::to_string));
        fields.push(counts[c].to_string());
        csv.write_record(&fields)?;
    }
    csv.flush()
}

pub fn write_variance<W: Write>(writer: W, pca: &PcaModel) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["component", "explained_variance_ratio", "cumulative_ratio"])?;
    for (i, (r, c)) in pca.explained_variance_ratio.iter().zip(pca.cumulative_ratio()).enumerate() {
        csv.write_record([(i + 1).to_string(), r.to_string(), c.to_string()])?;
    }
    csv.flush()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub method: Method,
    pub budget: usize,
    /// Mean test score in percent over the splits.
    pub score: f64,
}

/// Pruning score versus budget for each method, averaged over splits.
pub fn pruning_curves(
    matrix: &PerformanceMatrix,
    methods: &[Method],
    budgets: &[usize],
    setup: &ExperimentSetup,
    options: &PruneOptions,
) -> Result<Vec<CurvePoint>> {
    let mut sums = vec![0.0; methods.len() * budgets.len()];
    for seed in setup.split_seeds() {
        let s = split(matrix, setup.test_fraction, seed)?;
        let features = problem_features(&s.train);
        for (mi, &method) in methods.iter().enumerate() {
            for (bi, &budget) in budgets.iter().enumerate() {
                let selection = prune(method, &s.train, Some(&features), budget, seed, options)?;
                sums[mi * budgets.len() + bi] += evaluate_selection(&selection, &s.test)?.percent();
            }
        }
    }
    let n = setup.splits.max(1) as f64;
    Ok(methods
        .iter()
        .enumerate()
        .flat_map(|(mi, &method)| {
            let sums = &sums;
            budgets.iter().enumerate().map(move |(bi, &budget)| CurvePoint {
                method,
                budget,
                score: sums[mi * budgets.len() + bi] / n,
            })
        })
        .collect())
}

pub fn write_curves<W: Write>(writer: W, points: &[CurvePoint]) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["method", "budget", "score"])?;
    for p in points {
        csv.write_record([p.method.name().to_string(), p.budget.to_string(), p.score.to_string()])?;
    }
    csv.flush()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    /// Classifier name, or `selection` for the best achievable score.
    pub model: String,
    pub budget: usize,
    pub score: f64,
}

/// Classifier scores over decision-tree-pruned selections, plus the
/// selection ceiling, averaged over splits.
pub fn classifier_grid(
    matrix: &PerformanceMatrix,
    kinds: &[ModelKind],
    budgets: &[usize],
    setup: &ExperimentSetup,
    options: &PruneOptions,
    hyper: &Hyperparameters,
) -> Result<Vec<GridCell>> {
    let rows = kinds.len() + 1;
    let mut sums = vec![0.0; rows * budgets.len()];
    for seed in setup.split_seeds() {
        let s = split(matrix, setup.test_fraction, seed)?;
        let features = problem_features(&s.train);
        for (bi, &budget) in budgets.iter().enumerate() {
            let selection = prune(Method::DecisionTree, &s.train, Some(&features), budget, seed, options)?;
            sums[bi] += evaluate_selection(&selection, &s.test)?.percent();
            let labeled = make_labels(&s.train, &selection)?;
            for (ki, &kind) in kinds.iter().enumerate() {
                let model = train_model(kind, &labeled, hyper, seed)?;
                sums[(ki + 1) * budgets.len() + bi] += evaluate_model(&model, &s.test)?.percent();
            }
        }
    }
    let n = setup.splits.max(1) as f64;
    let names = std::iter::once("selection".to_string()).chain(kinds.iter().map(ToString::to_string));
    Ok(names
        .enumerate()
        .flat_map(|(ri, model)| {
            let sums = &sums;
            budgets.iter().enumerate().map(move |(bi, &budget)| GridCell {
                model: model.clone(),
                budget,
                score: sums[ri * budgets.len() + bi] / n,
            })
        })
        .collect())
}

pub fn write_grid<W: Write>(writer: W, cells: &[GridCell]) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["model", "budget", "score"])?;
    for c in cells {
        csv.write_record([c.model.clone(), c.budget.to_string(), c.score.to_string()])?;
    }
    csv.flush()
}
