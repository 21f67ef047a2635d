//! The matrix-multiply tuning space and problem shapes.

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Allowed values for each compile-time tile parameter.
pub const TILE_VALUES: [u32; 4] = [1, 2, 4, 8];

/// Allowed work-group shapes `(rows, cols)`, in canonical order.
pub const WORK_GROUPS: [(u32, u32); 10] =
    [(1, 64), (1, 128), (8, 8), (8, 16), (8, 32), (16, 8), (16, 16), (32, 8), (64, 1), (128, 1)];

/// Size of the full tuning space.
pub const SPACE_SIZE: usize = TILE_VALUES.len().pow(3) * WORK_GROUPS.len();

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{field} = {value} is not one of 1, 2, 4, 8")]
    InvalidTile { field: &'static str, value: u32 },
    #[error("work group {rows}x{cols} is not in the tuning space")]
    InvalidWorkGroup { rows: u32, cols: u32 },
    #[error("problem dimension {field} must be at least 1")]
    ZeroDimension { field: &'static str },
}

/// One point in the tuning space.
///
/// Field order is the canonical sort order: configs compare
/// lexicographically on `(acc, row_tile, col_tile, wg_rows, wg_cols)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelConfig {
    pub acc: u32,
    pub row_tile: u32,
    pub col_tile: u32,
    pub wg_rows: u32,
    pub wg_cols: u32,
}

impl KernelConfig {
    pub fn new(acc: u32, row_tile: u32, col_tile: u32, wg_rows: u32, wg_cols: u32) -> Result<Self, ConfigError> {
        let config = Self { acc, row_tile, col_tile, wg_rows, wg_cols };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, value) in [("acc", self.acc), ("row_tile", self.row_tile), ("col_tile", self.col_tile)] {
            if !TILE_VALUES.contains(&value) {
                return Err(ConfigError::InvalidTile { field, value });
            }
        }
        if !WORK_GROUPS.contains(&(self.wg_rows, self.wg_cols)) {
            return Err(ConfigError::InvalidWorkGroup { rows: self.wg_rows, cols: self.wg_cols });
        }
        Ok(())
    }

    /// All 640 configurations in canonical order.
    pub fn all() -> Vec<KernelConfig> {
        let mut out = Vec::with_capacity(SPACE_SIZE);
        for &acc in &TILE_VALUES {
            for &row_tile in &TILE_VALUES {
                for &col_tile in &TILE_VALUES {
                    for &(wg_rows, wg_cols) in &WORK_GROUPS {
                        out.push(KernelConfig { acc, row_tile, col_tile, wg_rows, wg_cols });
                    }
                }
            }
        }
        out
    }

    pub fn as_tuple(&self) -> [u32; 5] {
        [self.acc, self.row_tile, self.col_tile, self.wg_rows, self.wg_cols]
    }
}

impl fmt::Display for KernelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "acc={} tile={}x{} wg={}x{}", self.acc, self.row_tile, self.col_tile, self.wg_rows, self.wg_cols)
    }
}

/// A matrix-multiply shape: `(m x k) * (k x n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProblemSize {
    pub m: u64,
    pub k: u64,
    pub n: u64,
}

impl ProblemSize {
    pub fn new(m: u64, k: u64, n: u64) -> Result<Self, ConfigError> {
        for (field, value) in [("m", m), ("k", k), ("n", n)] {
            if value == 0 {
                return Err(ConfigError::ZeroDimension { field });
            }
        }
        Ok(Self { m, k, n })
    }

    pub fn dims(&self) -> [u64; 3] {
        [self.m, self.k, self.n]
    }

    /// Floating-point operations of one multiply-accumulate pass.
    pub fn flops(&self) -> f64 {
        2.0 * self.m as f64 * self.k as f64 * self.n as f64
    }
}

impl fmt::Display for ProblemSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.m, self.k, self.n)
    }
}
