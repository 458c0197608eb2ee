//! Append-only JSON-lines journal of completed sweep points, allowing an
//! interrupted run to resume without recomputation.
//!
//! The first line records a fingerprint of the resolved configuration; a
//! journal with a different fingerprint is refused. A torn final line from
//! an interrupted write is ignored.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::Cell;

#[derive(Serialize, Deserialize)]
struct Preamble {
    fingerprint: String,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    index: usize,
    cells: Vec<Cell>,
}

pub struct Journal {
    path: PathBuf,
    file: File,
}

/// Journal location for a given output path.
pub fn journal_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".journal");
    PathBuf::from(name)
}

impl Journal {
    /// Open the journal. With `resume`, completed entries of a matching
    /// journal are returned; otherwise any existing journal is replaced.
    pub fn open(path: &Path, fingerprint: &str, resume: bool) -> CliResult<(Journal, BTreeMap<usize, Vec<Cell>>)> {
        let mut done = BTreeMap::new();
        let existing = resume && path.exists();
        if existing {
            let reader = BufReader::new(File::open(path).map_err(|e| CliError::io(path.display().to_string(), e))?);
            let mut lines = reader.lines();
            let first = lines.next().transpose().map_err(|e| CliError::io(path.display().to_string(), e))?;
            let pre: Option<Preamble> = first.as_deref().and_then(|l| serde_json::from_str(l).ok());
            match pre {
                Some(p) if p.fingerprint == fingerprint => {}
                _ => {
                    return Err(CliError::Config(format!(
                        "journal {} belongs to a different configuration; remove it or run without --resume",
                        path.display()
                    )))
                }
            }
            for line in lines {
                let line = line.map_err(|e| CliError::io(path.display().to_string(), e))?;
                match serde_json::from_str::<Entry>(&line) {
                    Ok(e) => {
                        done.insert(e.index, e.cells);
                    }
                    Err(_) => break,
                }
            }
        }
        // (Re)write the preamble and surviving entries, dropping any torn tail.
        let mut f = File::create(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        write_line(&mut f, path, &Preamble { fingerprint: fingerprint.to_string() })?;
        for (&index, cells) in &done {
            write_line(&mut f, path, &Entry { index, cells: cells.clone() })?;
        }
        drop(f);
        let file = OpenOptions::new().append(true).open(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        Ok((Journal { path: path.to_path_buf(), file }, done))
    }

    pub fn record(&mut self, index: usize, cells: &[Cell]) -> CliResult<()> {
        write_line(&mut self.file, &self.path, &Entry { index, cells: cells.to_vec() })?;
        self.file.flush().map_err(|e| CliError::io(self.path.display().to_string(), e))
    }

    /// Delete the journal after the dataset has been written.
    pub fn finish(self) -> CliResult<()> {
        drop(self.file);
        std::fs::remove_file(&self.path).map_err(|e| CliError::io(self.path.display().to_string(), e))
    }
}

fn write_line<T: Serialize>(f: &mut File, path: &Path, value: &T) -> CliResult<()> {
    let mut line = serde_json::to_string(value).expect("journal entries serialize");
    line.push('\n');
    f.write_all(line.as_bytes()).map_err(|e| CliError::io(path.display().to_string(), e))
}

/// Evaluate `compute` for every index in `0..n` on a pool of `jobs`
/// workers, skipping indices already in `done`, and return the rows in
/// index order. Completed chunks are appended to the journal by this
/// (single) emitting thread.
pub fn run_points<F>(
    n: usize,
    jobs: usize,
    mut journal: Option<&mut Journal>,
    mut done: BTreeMap<usize, Vec<Cell>>,
    compute: F,
) -> CliResult<Vec<Vec<Cell>>>
where
    F: Fn(usize) -> Vec<Cell> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let pending: Vec<usize> = (0..n).filter(|i| !done.contains_key(i)).collect();
    let chunk = (pool.current_num_threads() * 4).max(1);
    for batch in pending.chunks(chunk) {
        let rows: Vec<(usize, Vec<Cell>)> = pool.install(|| batch.par_iter().map(|&i| (i, compute(i))).collect());
        for (i, cells) in rows {
            if let Some(j) = journal.as_deref_mut() {
                j.record(i, &cells)?;
            }
            done.insert(i, cells);
        }
    }
    Ok(done.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resume_skips_completed_points() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv.journal");
        let (mut j, done) = Journal::open(&path, "fp", true).unwrap();
        assert!(done.is_empty());
        j.record(1, &[Cell::num(0.5)]).unwrap();
        drop(j);
        // simulate a torn final line
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"index\":2,\"ce").unwrap();
        drop(f);

        let (mut j, done) = Journal::open(&path, "fp", true).unwrap();
        assert_eq!(done.len(), 1);
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let rows = run_points(3, 2, Some(&mut j), done, |i| {
            calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            vec![Cell::Int(i as i64)]
        })
        .unwrap();
        assert_eq!(calls.into_inner(), 2);
        assert_eq!(rows, vec![vec![Cell::Int(0)], vec![Cell::num(0.5)], vec![Cell::Int(2)]]);
        j.finish().unwrap();
        assert!(!path.exists());
    }

    #[test]
    fn mismatched_fingerprint_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j");
        Journal::open(&path, "a", false).unwrap();
        let err = Journal::open(&path, "b", true).err().unwrap();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn order_is_independent_of_workers() {
        let f = |i: usize| vec![Cell::num((i as f64).sin())];
        let a = run_points(50, 1, None, BTreeMap::new(), f).unwrap();
        let b = run_points(50, 7, None, BTreeMap::new(), f).unwrap();
        assert_eq!(a, b);
    }
}
