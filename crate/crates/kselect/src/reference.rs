//! Reference predictions: one selector decision per problem shape, used as
//! the golden file for checking compiled selectors.
//!
//! Schema: `m,k,n,acc,row_tile,col_tile,wg_rows,wg_cols`.

use std::io::{self, Read, Write};

use anyhow::{bail, Context, Result};
use kselect_core::config::{KernelConfig, ProblemSize};

pub const COLUMNS: [&str; 8] = ["m", "k", "n", "acc", "row_tile", "col_tile", "wg_rows", "wg_cols"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prediction {
    pub problem: ProblemSize,
    pub config: KernelConfig,
}

pub fn predictions(problems: &[ProblemSize], select: impl Fn(&ProblemSize) -> KernelConfig) -> Vec<Prediction> {
    problems.iter().map(|p| Prediction { problem: *p, config: select(p) }).collect()
}

pub fn write_predictions<W: Write>(writer: W, rows: &[Prediction]) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(COLUMNS)?;
    for r in rows {
        let mut fields: Vec<String> = r.problem.dims().iter().map(u64::to_string).collect();
        fields.extend(r.config.as_tuple().iter().map(u32::to_string));
        csv.write_record(&fields)?;
    }
    csv.flush()
}

pub fn read_predictions<R: Read>(reader: R) -> Result<Vec<Prediction>> {
    let mut csv = csv::Reader::from_reader(reader);
    let header = csv.headers()?.clone();
    if header.iter().ne(COLUMNS) {
        bail!("reference header must be `{}`", COLUMNS.join(","));
    }
    let mut out = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 1;
        let record = record.with_context(|| format!("row {row}"))?;
        let num = |c: usize| -> Result<u64> {
            record[c].parse().with_context(|| format!("row {row}: column `{}`", COLUMNS[c]))
        };
        let problem = ProblemSize::new(num(0)?, num(1)?, num(2)?).with_context(|| format!("row {row}"))?;
        let mut p = [0u32; 5];
        for (j, v) in p.iter_mut().enumerate() {
            *v = u32::try_from(num(3 + j)?).with_context(|| format!("row {row}"))?;
        }
        let config = KernelConfig::new(p[0], p[1], p[2], p[3], p[4]).with_context(|| format!("row {row}"))?;
        out.push(Prediction { problem, config });
    }
    Ok(out)
}
