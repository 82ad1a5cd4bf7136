use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentTable, HarnessError};

/// Fixed CSV column order. The first twelve columns are the plotting
/// contract; `seed_kind` and `chain_index` follow so rows stay
/// self-describing.
pub const CSV_HEADER: [&str; 14] = [
    "kind",
    "n",
    "delta",
    "C",
    "q",
    "solver",
    "trials",
    "successes",
    "proportion",
    "wilson_lo",
    "wilson_hi",
    "mean_ms",
    "seed_kind",
    "chain_index",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Rows in table order; optional fields print as empty cells.
pub fn write_csv<W: Write>(table: &ExperimentTable, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &table.rows {
        w.write_record([
            r.kind.tag().to_string(),
            r.n.to_string(),
            r.delta.to_string(),
            r.c.to_string(),
            r.q.to_string(),
            r.solver.clone(),
            r.trials.to_string(),
            r.successes.to_string(),
            r.proportion.to_string(),
            r.wilson_lo.to_string(),
            r.wilson_hi.to_string(),
            r.mean_ms.map(|x| x.to_string()).unwrap_or_default(),
            r.seed_kind.tag(),
            r.chain_index.map(|x| x.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(table: &ExperimentTable, mut out: W) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(&mut out, table)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<ExperimentTable, HarnessError> {
    Ok(serde_json::from_reader(input)?)
}

pub fn emit_results(table: &ExperimentTable, format: OutputFormat, path: impl AsRef<Path>) -> Result<(), HarnessError> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        OutputFormat::Csv => write_csv(table, &mut out)?,
        OutputFormat::Json => write_json(table, &mut out)?,
    }
    out.flush()?;
    Ok(())
}
