//! Decision-tree selectors as portable documents and C source.
//!
//! Scaled thresholds are folded back to raw integer dimensions, so the
//! emitted function compares `m`, `k` and `n` directly against constants.
//! A value goes left iff it is strictly below the threshold.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use thiserror::Error;

use crate::config::{KernelConfig, ProblemSize};
use crate::selection_models::{ClassNode, FeatureScaler, ModelKind, ModelParams, SelectorModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodegenError {
    #[error("model kind {0} cannot be exported as a tree")]
    NotATree(ModelKind),
    #[error("`{0}` is not a valid C identifier")]
    InvalidIdentifier(String),
    #[error("leaf config {0} is not part of the selection")]
    ForeignLeaf(KernelConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Dim {
    M,
    K,
    N,
}

impl Dim {
    pub const ALL: [Dim; 3] = [Dim::M, Dim::K, Dim::N];

    pub fn name(self) -> &'static str {
        match self {
            Dim::M => "m",
            Dim::K => "k",
            Dim::N => "n",
        }
    }

    pub fn of(self, problem: &ProblemSize) -> u64 {
        match self {
            Dim::M => problem.m,
            Dim::K => problem.k,
            Dim::N => problem.n,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum TreeDocument {
    Split { feature: Dim, raw_threshold: u64, left: Box<TreeDocument>, right: Box<TreeDocument> },
    Leaf { config: KernelConfig },
}

impl TreeDocument {
    pub fn traverse(&self, problem: &ProblemSize) -> KernelConfig {
        let mut at = self;
        loop {
            match at {
                TreeDocument::Split { feature, raw_threshold, left, right } => {
                    at = if feature.of(problem) < *raw_threshold { left } else { right }
                }
                TreeDocument::Leaf { config } => return *config,
            }
        }
    }

    pub fn internal_nodes(&self) -> usize {
        match self {
            TreeDocument::Split { left, right, .. } => 1 + left.internal_nodes() + right.internal_nodes(),
            TreeDocument::Leaf { .. } => 0,
        }
    }

    pub fn leaves(&self) -> Vec<KernelConfig> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![self];
        while let Some(node) = stack.pop() {
            match node {
                TreeDocument::Split { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
                TreeDocument::Leaf { config } => out.push(*config),
            }
        }
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeDocument::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
            TreeDocument::Leaf { .. } => 0,
        }
    }

    /// Every leaf must name a config from `allowed`.
    pub fn check_leaves(&self, allowed: &[KernelConfig]) -> Result<(), CodegenError> {
        match self.leaves().into_iter().find(|c| !allowed.contains(c)) {
            Some(c) => Err(CodegenError::ForeignLeaf(c)),
            None => Ok(()),
        }
    }
}

/// Smallest `v >= 1` whose scaled log value reaches `threshold`, or
/// `u64::MAX` when none does.
pub fn raw_threshold(scaler: &FeatureScaler, feature: usize, threshold: f64) -> u64 {
    let reaches = |v: u64| scaler.scale_value(feature, libm::log2(v as f64)) >= threshold;
    if reaches(1) {
        return 1;
    }
    if !reaches(u64::MAX) {
        return u64::MAX;
    }
    // Invariant: !reaches(lo) && reaches(hi).
    let (mut lo, mut hi) = (1u64, u64::MAX);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn export_tree(model: &SelectorModel) -> Result<TreeDocument, CodegenError> {
    if model.kind != ModelKind::DecisionTree {
        return Err(CodegenError::NotATree(model.kind));
    }
    match &model.params {
        ModelParams::Constant { label } => Ok(TreeDocument::Leaf { config: model.selected_configs[*label] }),
        ModelParams::Tree(tree) => Ok(convert(model, &tree.nodes, 0)),
        _ => Err(CodegenError::NotATree(model.kind)),
    }
}

fn convert(model: &SelectorModel, nodes: &[ClassNode], at: usize) -> TreeDocument {
    match nodes[at] {
        ClassNode::Split { feature, threshold, left, right } => TreeDocument::Split {
            feature: Dim::ALL[feature],
            raw_threshold: raw_threshold(&model.scaler, feature, threshold),
            left: Box::new(convert(model, nodes, left)),
            right: Box::new(convert(model, nodes, right)),
        },
        ClassNode::Leaf { label } => TreeDocument::Leaf { config: model.selected_configs[label] },
    }
}

/// Dimension values for parity checks: `1..=8`, `2^j` for `j` in `4..=12`
/// and `3 * 2^j` for `j` in `3..=7`.
pub fn parity_dimensions() -> Vec<u64> {
    let mut dims: Vec<u64> = (1..=8).collect();
    dims.extend((4..=12).map(|j| 1u64 << j));
    dims.extend((3..=7).map(|j| 3u64 << j));
    dims.sort_unstable();
    dims
}

/// Every `(m, k, n)` over [`parity_dimensions`], 10,648 triples.
pub fn parity_grid() -> Vec<ProblemSize> {
    let dims = parity_dimensions();
    let mut out = Vec::with_capacity(dims.len().pow(3));
    for &m in &dims {
        for &k in &dims {
            for &n in &dims {
                out.push(ProblemSize { m, k, n });
            }
        }
    }
    out
}

const RESERVED: &[&str] = &[
    "alignas",
    "alignof",
    "and",
    "and_eq",
    "asm",
    "auto",
    "bitand",
    "bitor",
    "bool",
    "break",
    "case",
    "catch",
    "char",
    "char8_t",
    "char16_t",
    "char32_t",
    "class",
    "compl",
    "concept",
    "const",
    "consteval",
    "constexpr",
    "constinit",
    "const_cast",
    "continue",
    "co_await",
    "co_return",
    "co_yield",
    "decltype",
    "default",
    "delete",
    "do",
    "double",
    "dynamic_cast",
    "else",
    "enum",
    "explicit",
    "export",
    "extern",
    "false",
    "float",
    "for",
    "friend",
    "goto",
    "if",
    "inline",
    "int",
    "long",
    "mutable",
    "namespace",
    "new",
    "noexcept",
    "not",
    "not_eq",
    "nullptr",
    "operator",
    "or",
    "or_eq",
    "private",
    "protected",
    "public",
    "register",
    "reinterpret_cast",
    "requires",
    "restrict",
    "return",
    "short",
    "signed",
    "sizeof",
    "static",
    "static_assert",
    "static_cast",
    "struct",
    "switch",
    "template",
    "this",
    "thread_local",
    "throw",
    "true",
    "try",
    "typedef",
    "typeid",
    "typename",
    "typeof",
    "union",
    "unsigned",
    "using",
    "virtual",
    "void",
    "volatile",
    "wchar_t",
    "while",
    "xor",
    "xor_eq",
    "kselect_config",
    "m",
    "k",
    "n",
];

pub fn validate_identifier(symbol: &str) -> Result<(), CodegenError> {
    let mut chars = symbol.chars();
    let head_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    let tail_ok = chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    let reserved_prefix = symbol.starts_with("__")
        || (symbol.starts_with('_') && symbol[1..].starts_with(|c: char| c.is_ascii_uppercase()));
    if head_ok && tail_ok && !reserved_prefix && !RESERVED.contains(&symbol) {
        Ok(())
    } else {
        Err(CodegenError::InvalidIdentifier(symbol.into()))
    }
}

const PRELUDE: &str = "\
#include <stdint.h>

#ifndef KSELECT_CONFIG_DEFINED
#define KSELECT_CONFIG_DEFINED
struct kselect_config {
    uint32_t acc;
    uint32_t row_tile;
    uint32_t col_tile;
    uint32_t wg_rows;
    uint32_t wg_cols;
};
#endif
";

/// C source for `symbol(m, k, n)`, valid as C99 and C++11.
pub fn emit_selector_source(doc: &TreeDocument, symbol: &str) -> Result<String, CodegenError> {
    validate_identifier(symbol)?;
    let mut out = String::from(PRELUDE);
    let _ = write!(
        out,
        "\nstatic inline struct kselect_config {symbol}(uint64_t m, uint64_t k, uint64_t n)\n{{\n    (void)m;\n    (void)k;\n    (void)n;\n"
    );
    emit_node(&mut out, doc, 1);
    out.push_str("}\n");
    Ok(out)
}

fn indent(out: &mut String, level: usize) {
    (0..level).for_each(|_| out.push_str("    "));
}

fn emit_node(out: &mut String, node: &TreeDocument, level: usize) {
    match node {
        TreeDocument::Split { feature, raw_threshold, left, right } => {
            indent(out, level);
            let _ = writeln!(out, "if ({feature} < UINT64_C({raw_threshold})) {{");
            emit_node(out, left, level + 1);
            indent(out, level);
            out.push_str("} else {\n");
            emit_node(out, right, level + 1);
            indent(out, level);
            out.push_str("}\n");
        }
        TreeDocument::Leaf { config } => {
            let [a, r, c, wr, wc] = config.as_tuple();
            indent(out, level);
            let _ =
                writeln!(out, "{{ struct kselect_config cfg = {{ {a}u, {r}u, {c}u, {wr}u, {wc}u }}; return cfg; }}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(i: usize) -> KernelConfig {
        KernelConfig::all()[i]
    }

    fn leaf(i: usize) -> Box<TreeDocument> {
        Box::new(TreeDocument::Leaf { config: cfg(i) })
    }

    fn depth_two() -> TreeDocument {
        TreeDocument::Split {
            feature: Dim::M,
            raw_threshold: 512,
            left: Box::new(TreeDocument::Split { feature: Dim::K, raw_threshold: 8, left: leaf(0), right: leaf(1) }),
            right: Box::new(TreeDocument::Split { feature: Dim::N, raw_threshold: 100, left: leaf(2), right: leaf(3) }),
        }
    }

    #[test]
    fn structural_counts() {
        let src = emit_selector_source(&depth_two(), "pick").unwrap();
        assert_eq!(src.matches("if (").count(), 3);
        assert_eq!(src.matches("return").count(), 4);
        let single = emit_selector_source(&TreeDocument::Leaf { config: cfg(5) }, "pick").unwrap();
        assert_eq!(single.matches("return").count(), 1);
        assert_eq!(single.matches("if (").count(), 0);
    }

    #[test]
    fn traversal_uses_strict_less_than() {
        let doc = depth_two();
        let p = |m, k, n| ProblemSize::new(m, k, n).unwrap();
        assert_eq!(doc.traverse(&p(511, 7, 1)), cfg(0));
        assert_eq!(doc.traverse(&p(511, 8, 1)), cfg(1));
        assert_eq!(doc.traverse(&p(512, 8, 99)), cfg(2));
        assert_eq!(doc.traverse(&p(512, 8, 100)), cfg(3));
        assert_eq!(doc.internal_nodes(), 3);
        assert_eq!(doc.depth(), 2);
    }

    #[test]
    fn identifiers() {
        for ok in ["select_gemm", "_x", "A1"] {
            assert!(validate_identifier(ok).is_ok(), "{ok}");
        }
        for bad in ["", "1a", "a-b", "int", "return", "__x", "_Bad", "m", "a b"] {
            assert_eq!(validate_identifier(bad), Err(CodegenError::InvalidIdentifier(bad.into())));
        }
    }

    #[test]
    fn raw_threshold_search() {
        let scaler = FeatureScaler { mean: alloc::vec![0.0], std: alloc::vec![1.0], constant: alloc::vec![false] };
        assert_eq!(raw_threshold(&scaler, 0, 9.0), 512);
        assert_eq!(raw_threshold(&scaler, 0, 8.9), 478);
        assert_eq!(raw_threshold(&scaler, 0, -3.0), 1);
        assert_eq!(raw_threshold(&scaler, 0, 65.0), u64::MAX);
    }

    #[test]
    fn foreign_leaves_are_reported() {
        let doc = depth_two();
        assert!(doc.check_leaves(&[cfg(0), cfg(1), cfg(2), cfg(3)]).is_ok());
        assert_eq!(doc.check_leaves(&[cfg(0), cfg(1), cfg(2)]), Err(CodegenError::ForeignLeaf(cfg(3))));
    }

    #[test]
    fn parity_grid_size() {
        assert_eq!(parity_dimensions().len(), 22);
        assert_eq!(parity_grid().len(), 10_648);
    }

    #[test]
    fn output_is_stable() {
        let a = emit_selector_source(&depth_two(), "pick").unwrap();
        assert_eq!(a, emit_selector_source(&depth_two(), "pick").unwrap());
        assert!(a.contains("if (m < UINT64_C(512)) {"));
    }
}
