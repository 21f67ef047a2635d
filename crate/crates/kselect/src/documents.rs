//! JSON documents: selections, trained models, exported trees and
//! synthetic dataset specs.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use kselect_core::codegen::TreeDocument;
use kselect_core::config::KernelConfig;
use kselect_core::dataset::PerformanceMatrix;
use kselect_core::pruning::{Method, Selection};
use kselect_core::selection_models::SelectorModel;
use kselect_core::synthetic::SyntheticSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// A selection stored by configuration value, so it can be resolved against
/// any dataset that contains those configurations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionDocument {
    pub method: Method,
    pub budget: usize,
    pub seed: u64,
    pub configs: Vec<KernelConfig>,
}

impl SelectionDocument {
    pub fn new(selection: &Selection, matrix: &PerformanceMatrix, seed: u64) -> Self {
        SelectionDocument {
            method: selection.method,
            budget: selection.budget,
            seed,
            configs: selection.config_indices.iter().map(|&c| matrix.configs()[c]).collect(),
        }
    }

    /// Column indices of the stored configs in `matrix`.
    pub fn resolve(&self, matrix: &PerformanceMatrix) -> Result<Selection> {
        if self.configs.is_empty() {
            bail!("selection lists no configurations");
        }
        let mut config_indices = Vec::with_capacity(self.configs.len());
        for config in &self.configs {
            config.validate().with_context(|| format!("selection config {config}"))?;
            let Some(i) = matrix.configs().iter().position(|c| c == config) else {
                bail!("selection config {config} is not present in the dataset");
            };
            if config_indices.contains(&i) {
                bail!("selection lists config {config} twice");
            }
            config_indices.push(i);
        }
        Ok(Selection { config_indices, method: self.method, budget: self.budget })
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("documents always serialize");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)).with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not a valid document", path.display()))
}

/// Checks a loaded model for internal consistency.
pub fn check_model(model: &SelectorModel) -> Result<()> {
    if model.selected_configs.len() != model.selection.len() || model.selection.is_empty() {
        bail!("model selection and config list disagree");
    }
    for config in &model.selected_configs {
        config.validate().with_context(|| format!("model config {config}"))?;
    }
    let features = model.scaler.mean.len();
    if features != model.scaler.std.len() || !model.scaler.std.iter().all(|s| *s > 0.0) {
        bail!("model feature scaler is malformed");
    }
    Ok(())
}

pub fn check_tree(doc: &TreeDocument) -> Result<()> {
    for config in doc.leaves() {
        config.validate().with_context(|| format!("tree leaf {config}"))?;
    }
    Ok(())
}

pub fn check_spec(spec: &SyntheticSpec) -> Result<()> {
    if spec.problems.is_empty() {
        bail!("synthetic spec lists no problems");
    }
    for p in &spec.problems {
        if p.dims().contains(&0) {
            bail!("synthetic spec problem {p} has a zero dimension");
        }
    }
    if !(spec.noise_sigma >= 0.0 && spec.noise_sigma.is_finite()) {
        bail!("noise_sigma must be a finite value >= 0");
    }
    if !(spec.peak_gflops > 0.0 && spec.peak_gflops.is_finite()) {
        bail!("peak_gflops must be positive");
    }
    Ok(())
}
