//! Report documents: `{command, version, config, payload, meta}`.
//!
//! Everything outside `meta` is a pure function of the resolved config, so
//! masking `meta.timestamp` leaves byte-identical output across runs.

use std::io::Write;
use std::path::{Path, PathBuf};

use ntk_spectra::report::Table;
use ntk_spectra::{Error, Result, VERSION};
use serde_json::{json, Value};

use crate::commands::Outcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn document(command: &str, config: Value, payload: Option<Value>) -> Value {
    let timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let mut doc = json!({
        "command": command,
        "version": VERSION,
        "config": config,
        "meta": { "timestamp": timestamp },
    });
    if let Some(p) = payload {
        doc["payload"] = p;
    }
    doc
}

fn to_pretty(doc: &Value) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(doc)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    out.with_file_name(name)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn csv_bytes(table: &Table) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    Ok(buf)
}

pub fn write(command: &str, config: Value, outcome: Outcome, format: Format, out: Option<&Path>, plot: bool) -> Result<()> {
    if plot {
        let path = out.ok_or_else(|| Error::config("--emit-plot-data needs --out"))?;
        let table = outcome.plot.as_ref().expect("checked by caller");
        std::fs::write(sibling(path, ".plot.csv"), csv_bytes(table)?)?;
    }
    match format {
        Format::Json => emit(out, &to_pretty(&document(command, config, Some(outcome.payload)))?),
        Format::Csv => {
            if let Some(path) = out {
                std::fs::write(sibling(path, ".meta.json"), to_pretty(&document(command, config, None))?)?;
            }
            emit(out, &csv_bytes(&outcome.table)?)
        }
    }
}
