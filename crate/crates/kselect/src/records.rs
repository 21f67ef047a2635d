//! Benchmark-record CSV files.
//!
//! Schema: `m,k,n,acc,row_tile,col_tile,wg_rows,wg_cols,runtime_ns,gflops`.
//! Columns are matched by header name. Rows are numbered from 1, counting
//! data rows only.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use kselect_core::config::{ConfigError, KernelConfig, ProblemSize};
use kselect_core::dataset::BenchmarkRecord;
use thiserror::Error;

pub const COLUMNS: [&str; 10] =
    ["m", "k", "n", "acc", "row_tile", "col_tile", "wg_rows", "wg_cols", "runtime_ns", "gflops"];

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("header is missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("row {row}: column `{column}` value `{value}` is not a number")]
    MalformedNumber { row: usize, column: &'static str, value: String },
    #[error("row {row}: column `{column}` must be positive, got `{value}`")]
    NonPositiveValue { row: usize, column: &'static str, value: String },
    #[error("row {row}: `{column}` value `{value}` is not in the tuning space")]
    InvalidConfigValue { row: usize, column: &'static str, value: String },
    #[error("row {row}: {source}")]
    Csv { row: usize, source: csv::Error },
}

impl LoadError {
    /// Data-row number the error refers to, if any.
    pub fn row(&self) -> Option<usize> {
        match self {
            LoadError::MalformedNumber { row, .. }
            | LoadError::NonPositiveValue { row, .. }
            | LoadError::InvalidConfigValue { row, .. }
            | LoadError::Csv { row, .. } => Some(*row),
            _ => None,
        }
    }
}

pub fn load_records(path: &Path) -> Result<Vec<BenchmarkRecord>, LoadError> {
    let file = File::open(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    read_records(file)
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<BenchmarkRecord>, LoadError> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = csv.headers().map_err(|source| LoadError::Csv { row: 0, source })?.clone();
    let mut index = [0usize; 10];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = header.iter().position(|h| h == name).ok_or(LoadError::MissingColumn(name))?;
    }

    let mut out = Vec::new();
    for (i, result) in csv.records().enumerate() {
        let row = i + 1;
        let record = result.map_err(|source| LoadError::Csv { row, source })?;
        let field = |c: usize| record.get(index[c]).unwrap_or("");
        let integer = |c: usize| -> Result<u64, LoadError> {
            let text = field(c);
            match text.parse::<u64>() {
                Ok(v) => Ok(v),
                Err(_) if text.parse::<i64>().is_ok() => {
                    Err(LoadError::NonPositiveValue { row, column: COLUMNS[c], value: text.into() })
                }
                Err(_) => Err(LoadError::MalformedNumber { row, column: COLUMNS[c], value: text.into() }),
            }
        };
        let real = |c: usize| -> Result<f64, LoadError> {
            let text = field(c);
            let v: f64 =
                text.parse().map_err(|_| LoadError::MalformedNumber { row, column: COLUMNS[c], value: text.into() })?;
            if v.is_nan() {
                return Err(LoadError::MalformedNumber { row, column: COLUMNS[c], value: text.into() });
            }
            if !(v > 0.0 && v.is_finite()) {
                return Err(LoadError::NonPositiveValue { row, column: COLUMNS[c], value: text.into() });
            }
            Ok(v)
        };

        let mut dims = [0u64; 3];
        for (c, d) in dims.iter_mut().enumerate() {
            *d = integer(c)?;
            if *d == 0 {
                return Err(LoadError::NonPositiveValue { row, column: COLUMNS[c], value: field(c).into() });
            }
        }
        let mut params = [0u32; 5];
        for (j, p) in params.iter_mut().enumerate() {
            let c = 3 + j;
            let text = field(c);
            *p = text.parse().map_err(|_| match text.parse::<i64>() {
                Ok(_) => LoadError::InvalidConfigValue { row, column: COLUMNS[c], value: text.into() },
                Err(_) => LoadError::MalformedNumber { row, column: COLUMNS[c], value: text.into() },
            })?;
        }
        let config = KernelConfig::new(params[0], params[1], params[2], params[3], params[4]).map_err(|e| match e {
            ConfigError::InvalidTile { field, value } => {
                LoadError::InvalidConfigValue { row, column: field, value: value.to_string() }
            }
            _ => LoadError::InvalidConfigValue {
                row,
                column: "wg_rows,wg_cols",
                value: format!("{},{}", params[3], params[4]),
            },
        })?;
        out.push(BenchmarkRecord {
            problem: ProblemSize { m: dims[0], k: dims[1], n: dims[2] },
            config,
            runtime_ns: real(8)?,
            gflops: real(9)?,
        });
    }
    Ok(out)
}

/// Writes records with shortest round-trip float formatting.
pub fn write_records<W: Write>(writer: W, records: &[BenchmarkRecord]) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(COLUMNS)?;
    for r in records {
        let p = r.problem;
        let [a, rt, ct, wr, wc] = r.config.as_tuple();
        csv.write_record([
            p.m.to_string(),
            p.k.to_string(),
            p.n.to_string(),
            a.to_string(),
            rt.to_string(),
            ct.to_string(),
            wr.to_string(),
            wc.to_string(),
            r.runtime_ns.to_string(),
            r.gflops.to_string(),
        ])?;
    }
    csv.flush()
}
