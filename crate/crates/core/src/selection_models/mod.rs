//! Runtime selectors: classifiers mapping a problem shape to one
//! configuration of a pruned selection.
//!
//! Features are `log2(m), log2(k), log2(n)` z-scored with statistics from the
//! training rows. Labels are positions within the selection, so a trained
//! model stays meaningful when stored next to its selection.

mod knn;
mod svm;
mod tree;

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

pub use knn::Knn;
pub use svm::{rbf_kernel, BinaryMachine, LinearSvm, RbfSvm, SmoSettings};
pub use tree::{ClassNode, ClassificationTree};

use crate::config::{KernelConfig, ProblemSize};
use crate::dataset::PerformanceMatrix;
use crate::matrix::Matrix;
use crate::pruning::{PruningError, Score, Selection};
use crate::rng::{streams, Rng};

pub const N_FEATURES: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("selection is empty")]
    EmptySelection,
    #[error("training set has no rows")]
    DegenerateLabels,
    #[error("feature matrix has {actual} rows, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("test matrix column {column} holds {found}, model expects {expected}")]
    ConfigMismatch { column: usize, expected: KernelConfig, found: KernelConfig },
    #[error(transparent)]
    Pruning(#[from] PruningError),
}

pub fn log_features(problem: &ProblemSize) -> [f64; N_FEATURES] {
    problem.dims().map(|d| libm::log2(d as f64))
}

/// Per-feature z-scoring with population statistics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    /// Always positive; `1.0` where the training column was constant.
    pub std: Vec<f64>,
    pub constant: Vec<bool>,
}

impl FeatureScaler {
    pub fn fit(raw: &Matrix) -> FeatureScaler {
        let n = raw.rows().max(1) as f64;
        let mean = raw.column_means();
        let mut std = Vec::with_capacity(raw.cols());
        let mut constant = Vec::with_capacity(raw.cols());
        for (c, mu) in mean.iter().enumerate() {
            let var = (0..raw.rows())
                .map(|r| {
                    let d = raw[(r, c)] - mu;
                    d * d
                })
                .sum::<f64>()
                / n;
            let s = libm::sqrt(var);
            let flat = s.is_nan() || s <= 0.0;
            std.push(if flat { 1.0 } else { s });
            constant.push(flat);
        }
        FeatureScaler { mean, std, constant }
    }

    pub fn scale_value(&self, feature: usize, raw: f64) -> f64 {
        (raw - self.mean[feature]) / self.std[feature]
    }

    pub fn transform_row(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter().enumerate().map(|(f, &v)| self.scale_value(f, v)).collect()
    }

    pub fn transform(&self, raw: &Matrix) -> Matrix {
        let rows: Vec<Vec<f64>> = raw.iter_rows().map(|r| self.transform_row(r)).collect();
        if rows.is_empty() {
            return Matrix::zeros(0, raw.cols());
        }
        Matrix::from_rows(&rows)
    }
}

/// Training rows paired with the best selected position for each.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub raw_features: Matrix,
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub selection: Selection,
    pub selected_configs: Vec<KernelConfig>,
    pub scaler: FeatureScaler,
}

impl LabeledSet {
    pub fn n_classes(&self) -> usize {
        self.selection.len()
    }
}

/// Label each training row with the selected position of its best value
/// (ties to the lower position).
pub fn make_labels(train: &PerformanceMatrix, selection: &Selection) -> Result<LabeledSet, ModelError> {
    let raw: Vec<[f64; N_FEATURES]> = train.problems().iter().map(log_features).collect();
    let raw = if raw.is_empty() { Matrix::zeros(0, N_FEATURES) } else { Matrix::from_rows(&raw) };
    make_labels_with_features(train, selection, raw)
}

/// As [`make_labels`] with caller-supplied unscaled features.
pub fn make_labels_with_features(
    train: &PerformanceMatrix,
    selection: &Selection,
    raw_features: Matrix,
) -> Result<LabeledSet, ModelError> {
    if selection.is_empty() {
        return Err(ModelError::EmptySelection);
    }
    selection.validate(train.num_configs())?;
    if raw_features.rows() != train.num_problems() {
        return Err(ModelError::DimensionMismatch { expected: train.num_problems(), actual: raw_features.rows() });
    }
    let labels = train
        .values()
        .iter_rows()
        .map(|row| {
            let mut best = 0;
            for (pos, &c) in selection.config_indices.iter().enumerate() {
                if row[c] > row[selection.config_indices[best]] {
                    best = pos;
                }
            }
            best
        })
        .collect();
    let scaler = FeatureScaler::fit(&raw_features);
    Ok(LabeledSet {
        features: scaler.transform(&raw_features),
        raw_features,
        labels,
        selected_configs: selection.config_indices.iter().map(|&c| train.configs()[c]).collect(),
        selection: selection.clone(),
        scaler,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    DecisionTree,
    RandomForest,
    Knn { k: usize },
    LinearSvm,
    RbfSvm,
}

impl ModelKind {
    /// The classifier grid reported by the tooling.
    pub const GRID: [ModelKind; 6] = [
        ModelKind::DecisionTree,
        ModelKind::RandomForest,
        ModelKind::Knn { k: 1 },
        ModelKind::Knn { k: 3 },
        ModelKind::LinearSvm,
        ModelKind::RbfSvm,
    ];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::DecisionTree => f.write_str("decision-tree"),
            ModelKind::RandomForest => f.write_str("random-forest"),
            ModelKind::Knn { k } => write!(f, "knn-{k}"),
            ModelKind::LinearSvm => f.write_str("linear-svm"),
            ModelKind::RbfSvm => f.write_str("rbf-svm"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown model kind `{0}` (expected decision-tree, random-forest, knn-K, linear-svm or rbf-svm)")]
pub struct UnknownModelKind(pub String);

impl FromStr for ModelKind {
    type Err = UnknownModelKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "decision-tree" => Ok(ModelKind::DecisionTree),
            "random-forest" => Ok(ModelKind::RandomForest),
            "linear-svm" => Ok(ModelKind::LinearSvm),
            "rbf-svm" => Ok(ModelKind::RbfSvm),
            _ => s
                .strip_prefix("knn-")
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k > 0)
                .map(|k| ModelKind::Knn { k })
                .ok_or_else(|| UnknownModelKind(s.into())),
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for ModelKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for ModelKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hyperparameters {
    pub forest_trees: usize,
    pub forest_max_features: usize,
    pub forest_bootstrap: bool,
    pub svm_c: f64,
    pub linear_epochs: usize,
    /// `None` uses `1 / (features * variance of the scaled training data)`.
    pub rbf_gamma: Option<f64>,
    pub smo_tolerance: f64,
    pub smo_max_iterations: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            forest_trees: 100,
            forest_max_features: 2,
            forest_bootstrap: true,
            svm_c: 1.0,
            linear_epochs: 200,
            rbf_gamma: None,
            smo_tolerance: 1e-3,
            smo_max_iterations: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ModelParams {
    /// Every training row had the same label.
    Constant {
        label: usize,
    },
    Tree(ClassificationTree),
    Forest {
        n_classes: usize,
        trees: Vec<ClassificationTree>,
    },
    Knn(Knn),
    LinearSvm(LinearSvm),
    RbfSvm(RbfSvm),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SelectorModel {
    pub kind: ModelKind,
    pub params: ModelParams,
    pub scaler: FeatureScaler,
    pub selection: Selection,
    pub selected_configs: Vec<KernelConfig>,
}

fn vote(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

fn default_gamma(features: &Matrix) -> f64 {
    let data = features.as_slice();
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (features.cols() as f64 * var)
    } else {
        1.0
    }
}

pub fn train_model(
    kind: ModelKind,
    labeled: &LabeledSet,
    hyper: &Hyperparameters,
    seed: u64,
) -> Result<SelectorModel, ModelError> {
    let labels = &labeled.labels;
    if labels.is_empty() {
        return Err(ModelError::DegenerateLabels);
    }
    let x = &labeled.features;
    let n = x.rows();
    let n_classes = labeled.n_classes();
    let params = if labels.iter().all(|&l| l == labels[0]) {
        ModelParams::Constant { label: labels[0] }
    } else {
        match kind {
            ModelKind::DecisionTree => {
                ModelParams::Tree(ClassificationTree::fit(x, labels, n_classes, (0..n).collect(), None))
            }
            ModelKind::RandomForest => {
                let trees = (0..hyper.forest_trees.max(1))
                    .map(|t| {
                        let mut rng = Rng::stream(seed, &[streams::FOREST, t as u64]);
                        let rows = if hyper.forest_bootstrap {
                            (0..n).map(|_| rng.below(n)).collect()
                        } else {
                            (0..n).collect()
                        };
                        let sampling =
                            tree::FeatureSampling { max_features: hyper.forest_max_features.max(1), rng: &mut rng };
                        ClassificationTree::fit(x, labels, n_classes, rows, Some(sampling))
                    })
                    .collect();
                ModelParams::Forest { n_classes, trees }
            }
            ModelKind::Knn { k } => ModelParams::Knn(Knn::fit(x, labels, n_classes, k)),
            ModelKind::LinearSvm => {
                ModelParams::LinearSvm(LinearSvm::fit(x, labels, n_classes, hyper.svm_c, hyper.linear_epochs, seed))
            }
            ModelKind::RbfSvm => {
                let gamma = hyper.rbf_gamma.unwrap_or_else(|| default_gamma(x));
                let settings = SmoSettings {
                    c: hyper.svm_c,
                    tolerance: hyper.smo_tolerance,
                    max_iterations: hyper.smo_max_iterations,
                };
                ModelParams::RbfSvm(RbfSvm::fit(x, labels, n_classes, gamma, &settings))
            }
        }
    };
    Ok(SelectorModel {
        kind,
        params,
        scaler: labeled.scaler.clone(),
        selection: labeled.selection.clone(),
        selected_configs: labeled.selected_configs.clone(),
    })
}

impl SelectorModel {
    /// Selection position for already-scaled features.
    pub fn predict_scaled(&self, x: &[f64]) -> usize {
        match &self.params {
            ModelParams::Constant { label } => *label,
            ModelParams::Tree(t) => t.predict(x),
            ModelParams::Forest { n_classes, trees } => {
                let mut counts = vec![0usize; *n_classes];
                trees.iter().for_each(|t| counts[t.predict(x)] += 1);
                vote(&counts)
            }
            ModelParams::Knn(m) => m.predict(x),
            ModelParams::LinearSvm(m) => m.predict(x),
            ModelParams::RbfSvm(m) => m.predict(x),
        }
    }

    /// Selection position for unscaled features.
    pub fn predict_raw(&self, raw: &[f64]) -> usize {
        self.predict_scaled(&self.scaler.transform_row(raw))
    }

    pub fn predict_position(&self, problem: &ProblemSize) -> usize {
        self.predict_raw(&log_features(problem))
    }

    pub fn predict(&self, problem: &ProblemSize) -> KernelConfig {
        self.selected_configs[self.predict_position(problem)]
    }

    pub fn name(&self) -> String {
        self.kind.to_string()
    }
}

/// Achieved relative performance per test row for the predicted config.
pub fn achieved_by_model(model: &SelectorModel, test: &PerformanceMatrix) -> Result<Vec<f64>, ModelError> {
    model.selection.validate(test.num_configs())?;
    for (pos, &c) in model.selection.config_indices.iter().enumerate() {
        if test.configs()[c] != model.selected_configs[pos] {
            return Err(ModelError::ConfigMismatch {
                column: c,
                expected: model.selected_configs[pos],
                found: test.configs()[c],
            });
        }
    }
    Ok(test
        .problems()
        .iter()
        .enumerate()
        .map(|(p, problem)| {
            let pos = model.predict_position(problem);
            test.values()[(p, model.selection.config_indices[pos])]
        })
        .collect())
}

pub fn evaluate_model(model: &SelectorModel, test: &PerformanceMatrix) -> Result<Score, ModelError> {
    Ok(Score::from_achieved(achieved_by_model(model, test)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pruning::Method;

    fn matrix(rows: &[&[f64]]) -> PerformanceMatrix {
        let configs = KernelConfig::all()[..rows[0].len()].to_vec();
        let problems =
            (0..rows.len() as u32).map(|i| ProblemSize::new(1 << i, 2 + u64::from(i % 2), 1).unwrap()).collect();
        PerformanceMatrix::new(problems, configs, Matrix::from_rows(rows)).unwrap()
    }

    fn sel(indices: &[usize]) -> Selection {
        Selection { config_indices: indices.to_vec(), method: Method::TopCount, budget: indices.len() }
    }

    #[test]
    fn labels_are_selected_positions() {
        let m = matrix(&[&[0.2, 1.0, 0.7], &[0.9, 1.0, 0.9], &[1.0, 0.5, 0.6]]);
        let l = make_labels(&m, &sel(&[0, 2])).unwrap();
        assert_eq!(l.labels, vec![1, 0, 0]);
        let l = make_labels(&m, &sel(&[1])).unwrap();
        assert_eq!(l.labels, vec![0, 0, 0]);
        assert_eq!(make_labels(&m, &sel(&[])), Err(ModelError::EmptySelection));
    }

    #[test]
    fn scaler_flags_constant_columns() {
        let raw = Matrix::from_rows(&[[1.0, 5.0], [3.0, 5.0]]);
        let s = FeatureScaler::fit(&raw);
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.std, vec![1.0, 1.0]);
        assert_eq!(s.constant, vec![false, true]);
        assert_eq!(s.transform_row(&[3.0, 5.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn constant_labels_give_constant_models() {
        let m = matrix(&[&[1.0, 0.5], &[1.0, 0.2], &[1.0, 0.9]]);
        let l = make_labels(&m, &sel(&[0, 1])).unwrap();
        for kind in ModelKind::GRID {
            let model = train_model(kind, &l, &Hyperparameters::default(), 1).unwrap();
            assert_eq!(model.params, ModelParams::Constant { label: 0 });
            let q = ProblemSize::new(999, 3, 7).unwrap();
            assert_eq!(model.predict(&q), KernelConfig::all()[0]);
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in ModelKind::GRID {
            assert_eq!(kind.to_string().parse::<ModelKind>().unwrap(), kind);
        }
        assert!("knn-0".parse::<ModelKind>().is_err());
        assert!("svm".parse::<ModelKind>().is_err());
    }

    #[test]
    fn oracle_model_scores_full_marks() {
        let m = matrix(&[&[1.0, 0.5], &[0.4, 1.0], &[1.0, 0.3], &[0.2, 1.0]]);
        let l = make_labels(&m, &sel(&[0, 1])).unwrap();
        let model = train_model(ModelKind::Knn { k: 1 }, &l, &Hyperparameters::default(), 0).unwrap();
        assert_eq!(evaluate_model(&model, &m).unwrap().geomean_relative_performance, 1.0);
    }
}
