//! Subcommand implementations. Each produces a header and a table; the
//! caller decides where they go.

pub mod check;
pub mod dynamics;
pub mod resonance;
pub mod spectrum;
pub mod sweep;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rabi_core::NumericPolicy;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Format;
use crate::error::{CliError, CliResult};
use crate::journal::{journal_path, run_points, Journal};
use crate::output::{write_table, Cell, Table};

/// Execution settings that do not affect results.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub jobs: usize,
    pub resume: bool,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            jobs: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            resume: false,
            out: None,
            format: Format::Csv,
        }
    }
}

/// A finished dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: Value,
    pub table: Table,
    /// Rows that carry an error message.
    pub flagged: usize,
}

impl Dataset {
    /// Process exit code: 0 when clean, 3 when some rows are flagged.
    pub fn exit_code(&self) -> i32 {
        if self.flagged > 0 {
            3
        } else {
            0
        }
    }

    /// Write to `opts.out`, or to stdout when no path is set.
    pub fn emit(&self, opts: &RunOptions) -> CliResult<()> {
        match &opts.out {
            Some(path) => {
                let file = std::fs::File::create(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
                write_table(std::io::BufWriter::new(file), &self.header, &self.table, opts.format)
                    .map_err(|e| CliError::io(path.display().to_string(), e))
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                write_table(&mut lock, &self.header, &self.table, opts.format)
                    .and_then(|_| lock.flush())
                    .map_err(|e| CliError::io("<stdout>", e))
            }
        }
    }
}

/// Dataset header: tool identity, command, resolved configuration (without
/// the output destination) and numeric policy.
pub fn header<C: Serialize>(command: &str, config: &C, policy: Option<&NumericPolicy>, extra: Value) -> Value {
    let mut cfg = serde_json::to_value(config).expect("configs serialize");
    if let Some(obj) = cfg.as_object_mut() {
        obj.remove("output");
    }
    let mut h = json!({
        "tool": "rabi",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg,
    });
    if let Some(p) = policy {
        h["policy"] = serde_json::to_value(p).expect("policy serializes");
    }
    if let Value::Object(map) = extra {
        for (k, v) in map {
            h[k] = v;
        }
    }
    h
}

/// Run `compute` over `n` points with journaling when writing to a file.
pub(crate) fn run_journaled<F>(n: usize, header: &Value, opts: &RunOptions, compute: F) -> CliResult<(Vec<Vec<Cell>>, Option<Journal>)>
where
    F: Fn(usize) -> Vec<Cell> + Sync,
{
    if opts.resume && opts.out.is_none() {
        return Err(CliError::Config("--resume requires an output path".into()));
    }
    match &opts.out {
        Some(out) => {
            ensure_parent(out)?;
            let fingerprint = serde_json::to_string(header).expect("header serializes");
            let (mut journal, done) = Journal::open(&journal_path(out), &fingerprint, opts.resume)?;
            let rows = run_points(n, opts.jobs, Some(&mut journal), done, compute)?;
            Ok((rows, Some(journal)))
        }
        None => Ok((run_points(n, opts.jobs, None, BTreeMap::new(), compute)?, None)),
    }
}

/// Write the dataset, then remove the journal that backed it.
pub fn finish(dataset: &Dataset, journal: Option<Journal>, opts: &RunOptions) -> CliResult<()> {
    dataset.emit(opts)?;
    if let Some(j) = journal {
        j.finish()?;
    }
    Ok(())
}

/// Count rows whose `errors` column is non-empty.
pub(crate) fn count_flagged(table: &Table) -> usize {
    match table.column_index("errors") {
        Some(j) => table.rows.iter().filter(|r| matches!(&r[j], Cell::Text(s) if !s.is_empty())).count(),
        None => 0,
    }
}

pub(crate) fn ensure_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))
        }
        _ => Ok(()),
    }
}
