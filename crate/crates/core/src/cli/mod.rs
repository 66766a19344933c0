//! Command-line front end: argument parsing, JSON result documents with a run
//! manifest, optional CSV sample dumps, and replay of earlier runs.

mod commands;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use commands::Command;

use crate::error::{Error, Result};

/// Version of the JSON result layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "bishop", version,  about = "Weighted translation operators, cyclicity and continued fractions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the JSON result document here instead of standard output.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,

    /// Also write sample values as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,

    /// Seed for every randomized choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

/// Everything needed to rerun a command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Command,
    pub grid_n: Option<usize>,
    pub precision_bits: u32,
    pub seed: u64,
    pub version: String,
    pub wall_clock_seconds: f64,
}

/// Column data for a CSV dump.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// What a command produces before it is wrapped in a document.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Value,
    pub diagnostics: Value,
    pub grid_n: Option<usize>,
    pub csv: Option<CsvTable>,
}

/// A complete result document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub schema_version: u32,
    pub manifest: RunManifest,
    pub results: Value,
    pub diagnostics: Value,
}

/// Runs one command and wraps its output.
pub fn execute(command: &Command, seed: u64) -> Result<(Document, Option<CsvTable>)> {
    let start = Instant::now();
    let outcome = command.run(seed)?;
    let manifest = RunManifest {
        command: command.name(),
        parameters: command.clone(),
        grid_n: outcome.grid_n,
        precision_bits: crate::numerics::precision_bits(),
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    let diagnostics = if outcome.diagnostics.is_null() { json!({}) } else { outcome.diagnostics };
    Ok((Document { schema_version: SCHEMA_VERSION, manifest, results: outcome.results, diagnostics }, outcome.csv))
}

pub fn write_csv(path: &Path, table: &CsvTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_document(path: &Path) -> Result<Document> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Field-by-field comparison of two documents, ignoring wall-clock time.
/// Returns the paths of the fields that differ.
pub fn compare_documents(a: &Document, b: &Document) -> Result<Vec<String>> {
    let strip = |d: &Document| -> Result<Value> {
        let mut v = serde_json::to_value(d)?;
        v["manifest"]["wall_clock_seconds"] = Value::Null;
        Ok(v)
    };
    let mut out = Vec::new();
    diff_values("", &strip(a)?, &strip(b)?, &mut out);
    Ok(out)
}

fn diff_values(path: &str, a: &Value, b: &Value, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for (k, va) in x {
                match y.get(k) {
                    Some(vb) => diff_values(&format!("{path}/{k}"), va, vb, out),
                    None => out.push(format!("{path}/{k}")),
                }
            }
            out.extend(y.keys().filter(|k| !x.contains_key(*k)).map(|k| format!("{path}/{k}")));
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (i, (va, vb)) in x.iter().zip(y).enumerate() {
                diff_values(&format!("{path}/{i}"), va, vb, out);
            }
        }
        // numbers compare by their shortest round-trip text, i.e. bit for bit
        _ => {
            if *a != *b {
                out.push(path.to_string());
            }
        }
    }
}

/// Reruns the command recorded in a document and reports any differing fields.
pub fn replay(path: &Path) -> Result<(Document, Vec<String>)> {
    let stored = read_document(path)?;
    let (fresh, _) = execute(&stored.manifest.parameters, stored.manifest.seed)?;
    let diffs = compare_documents(&stored, &fresh)?;
    Ok((fresh, diffs))
}

fn emit(doc: &Document, csv: Option<&CsvTable>, json_path: Option<&Path>, csv_path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    match json_path {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            // a closed pipe (e.g. `| head`) is not an error
            if let Err(e) = writeln!(out, "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    if let Some(p) = csv_path {
        match csv {
            Some(t) => write_csv(p, t)?,
            None => return Err(Error::precondition(format!("command '{}' has no sample table for CSV output", doc.manifest.command))),
        }
    }
    Ok(())
}

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 on success, 1 on bad input, 2 on numerical failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Replay(args) => replay(&args.manifest).and_then(|(doc, diffs)| {
            let identical = diffs.is_empty();
            let mut doc = doc;
            doc.diagnostics["replay"] = json!({ "source": args.manifest.display().to_string(), "identical": identical, "differences": diffs });
            emit(&doc, None, cli.json.as_deref(), None)?;
            if identical {
                Ok(())
            } else {
                Err(Error::numerical(format!("replay differs in {} field(s)", diffs.len())))
            }
        }),
        command => execute(command, cli.seed).and_then(|(doc, csv)| emit(&doc, csv.as_ref(), cli.json.as_deref(), cli.csv.as_deref())),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
