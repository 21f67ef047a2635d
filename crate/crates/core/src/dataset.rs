//! Benchmark records, the problem x configuration performance matrix, and
//! seeded train/test splits.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::config::{KernelConfig, ProblemSize};
use crate::matrix::Matrix;
use crate::rng::{streams, Rng};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("dataset contains no benchmark records")]
    Empty,
    #[error("duplicate measurement for problem {problem} and config {config}")]
    DuplicateCell { problem: ProblemSize, config: KernelConfig },
    #[error("problem {problem} has no measurement for config {config}")]
    IncompleteGrid { problem: ProblemSize, config: KernelConfig },
    #[error("performance value at row {row}, column {col} is not a positive finite number")]
    NonPositive { row: usize, col: usize },
    #[error("normalized value at row {row}, column {col} is outside (0, 1]")]
    OutOfRange { row: usize, col: usize },
    #[error("row {row} has no entry equal to 1.0")]
    MissingRowBest { row: usize },
    #[error("problem {0} appears more than once")]
    DuplicateProblem(ProblemSize),
    #[error("config {0} appears more than once")]
    DuplicateConfig(KernelConfig),
    #[error("matrix shape {rows}x{cols} does not match {problems} problems and {configs} configs")]
    ShapeMismatch { rows: usize, cols: usize, problems: usize, configs: usize },
    #[error("split of {problems} problems with test fraction {fraction} leaves one side empty")]
    DegenerateSplit { problems: usize, fraction: f64 },
}

/// One measured (problem, configuration) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkRecord {
    pub problem: ProblemSize,
    pub config: KernelConfig,
    pub runtime_ns: f64,
    pub gflops: f64,
}

/// What to do with problems that lack a measurement for some config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IncompletePolicy {
    #[default]
    Error,
    /// Remove every problem with at least one missing cell.
    DropProblem,
}

/// Un-normalized throughput grid: `gflops[(p, c)]` for `problems[p]`, `configs[c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawGrid {
    pub problems: Vec<ProblemSize>,
    pub configs: Vec<KernelConfig>,
    pub gflops: Matrix,
}

/// Assemble the raw grid. Configs are sorted canonically, problems keep the
/// order of their first appearance.
pub fn build_matrix(records: &[BenchmarkRecord], policy: IncompletePolicy) -> Result<RawGrid, DatasetError> {
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }

    let mut problems = Vec::new();
    let mut problem_index = BTreeMap::new();
    let mut config_set = BTreeMap::new();
    for r in records {
        problem_index.entry(r.problem).or_insert_with(|| {
            problems.push(r.problem);
            problems.len() - 1
        });
        config_set.insert(r.config, ());
    }
    let configs: Vec<KernelConfig> = config_set.into_keys().collect();
    let config_index: BTreeMap<KernelConfig, usize> = configs.iter().enumerate().map(|(i, c)| (*c, i)).collect();

    let mut cells: Vec<Option<f64>> = alloc::vec![None; problems.len() * configs.len()];
    for r in records {
        let slot = problem_index[&r.problem] * configs.len() + config_index[&r.config];
        if cells[slot].is_some() {
            return Err(DatasetError::DuplicateCell { problem: r.problem, config: r.config });
        }
        cells[slot] = Some(r.gflops);
    }

    let mut kept_problems = Vec::with_capacity(problems.len());
    let mut data = Vec::with_capacity(cells.len());
    for (p, problem) in problems.iter().enumerate() {
        let row = &cells[p * configs.len()..(p + 1) * configs.len()];
        if let Some(hole) = row.iter().position(Option::is_none) {
            match policy {
                IncompletePolicy::Error => {
                    return Err(DatasetError::IncompleteGrid { problem: *problem, config: configs[hole] })
                }
                IncompletePolicy::DropProblem => continue,
            }
        }
        kept_problems.push(*problem);
        data.extend(row.iter().map(|v| v.unwrap_or_default()));
    }
    if kept_problems.is_empty() {
        return Err(DatasetError::Empty);
    }

    Ok(RawGrid { gflops: Matrix::from_vec(kept_problems.len(), configs.len(), data), problems: kept_problems, configs })
}

/// Divide every row by its maximum. The row maximum maps to exactly 1.0.
pub fn normalize_rows(raw: &Matrix) -> Result<Matrix, DatasetError> {
    let mut out = raw.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        if let Some(col) = row.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(DatasetError::NonPositive { row: r, col });
        }
        let max = row.iter().copied().fold(f64::MIN, f64::max);
        for (col, v) in row.iter_mut().enumerate() {
            *v /= max;
            if *v <= 0.0 {
                return Err(DatasetError::NonPositive { row: r, col });
            }
        }
    }
    Ok(out)
}

/// Normalized performance: rows are problems, columns are configs, and each
/// row's best configuration scores exactly 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceMatrix {
    problems: Vec<ProblemSize>,
    configs: Vec<KernelConfig>,
    values: Matrix,
}

impl PerformanceMatrix {
    /// Wrap already-normalized values, checking every invariant.
    pub fn new(problems: Vec<ProblemSize>, configs: Vec<KernelConfig>, values: Matrix) -> Result<Self, DatasetError> {
        if values.rows() != problems.len() || values.cols() != configs.len() {
            return Err(DatasetError::ShapeMismatch {
                rows: values.rows(),
                cols: values.cols(),
                problems: problems.len(),
                configs: configs.len(),
            });
        }
        for (r, row) in values.iter_rows().enumerate() {
            if let Some(col) = row.iter().position(|v| !(*v > 0.0 && *v <= 1.0)) {
                return Err(DatasetError::OutOfRange { row: r, col });
            }
            if !row.contains(&1.0) {
                return Err(DatasetError::MissingRowBest { row: r });
            }
        }
        let mut seen = BTreeMap::new();
        for p in &problems {
            if seen.insert(*p, ()).is_some() {
                return Err(DatasetError::DuplicateProblem(*p));
            }
        }
        let mut seen = BTreeMap::new();
        for c in &configs {
            if seen.insert(*c, ()).is_some() {
                return Err(DatasetError::DuplicateConfig(*c));
            }
        }
        Ok(Self { problems, configs, values })
    }

    pub fn problems(&self) -> &[ProblemSize] {
        &self.problems
    }

    pub fn configs(&self) -> &[KernelConfig] {
        &self.configs
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn num_problems(&self) -> usize {
        self.problems.len()
    }

    pub fn num_configs(&self) -> usize {
        self.configs.len()
    }

    pub fn row(&self, p: usize) -> &[f64] {
        self.values.row(p)
    }

    /// Column of each row's best config (ties to the lowest column).
    pub fn row_argmax(&self) -> Vec<usize> {
        self.values.iter_rows().map(crate::matrix::argmax).collect()
    }

    /// Sub-matrix with the listed problems, in the listed order.
    pub fn select_problems(&self, indices: &[usize]) -> PerformanceMatrix {
        PerformanceMatrix {
            problems: indices.iter().map(|&i| self.problems[i]).collect(),
            configs: self.configs.clone(),
            values: self.values.select_rows(indices),
        }
    }
}

/// Normalize a raw grid by per-row maximum throughput.
pub fn normalize(raw: &RawGrid) -> Result<PerformanceMatrix, DatasetError> {
    let values = normalize_rows(&raw.gflops)?;
    PerformanceMatrix::new(raw.problems.clone(), raw.configs.clone(), values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSplit {
    pub train: PerformanceMatrix,
    pub test: PerformanceMatrix,
    /// Row indices of the training problems in the source matrix, ascending.
    pub train_indices: Vec<usize>,
    /// Row indices of the test problems in the source matrix, ascending.
    pub test_indices: Vec<usize>,
    pub seed: u64,
}

/// Number of test rows for `problems` rows at `test_fraction`.
pub fn test_size(problems: usize, test_fraction: f64) -> usize {
    libm::round(problems as f64 * test_fraction) as usize
}

/// Seeded random train/test partition.
///
/// The problem indices are shuffled with the split stream of `seed`; the
/// first `round(P * test_fraction)` shuffled indices form the test side.
/// Both sides keep the source row order.
pub fn split(matrix: &PerformanceMatrix, test_fraction: f64, seed: u64) -> Result<DataSplit, DatasetError> {
    let p = matrix.num_problems();
    let degenerate = DatasetError::DegenerateSplit { problems: p, fraction: test_fraction };
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(degenerate);
    }
    let n_test = test_size(p, test_fraction);
    if n_test == 0 || n_test >= p {
        return Err(degenerate);
    }

    let mut order: Vec<usize> = (0..p).collect();
    Rng::stream(seed, &[streams::SPLIT]).shuffle(&mut order);
    let mut test_indices = order[..n_test].to_vec();
    let mut train_indices = order[n_test..].to_vec();
    test_indices.sort_unstable();
    train_indices.sort_unstable();

    Ok(DataSplit {
        train: matrix.select_problems(&train_indices),
        test: matrix.select_problems(&test_indices),
        train_indices,
        test_indices,
        seed,
    })
}
