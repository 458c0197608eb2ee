//! `spectrum`: converged Floquet or quantum-Rabi spectra along Δ, with
//! crossing/anti-crossing classification of the gap minima.

use rabi_core::floquet::{
    classify_sampled, converged_floquet_spectrum, converged_quantum_spectrum, CrossingEvent, SpectrumResult,
};
use rabi_core::ModelParams;
use serde_json::json;

use super::{count_flagged, header, run_journaled, Dataset, RunOptions};
use crate::config::{SpectrumConfig, SpectrumKind};
use crate::error::CliResult;
use crate::journal::Journal;
use crate::output::{Cell, Table};

fn value_columns(config: &SpectrumConfig) -> Vec<String> {
    match config.kind {
        SpectrumKind::Semiclassical => ["fq_low", "fq_high", "gap", "band0", "band1", "band2", "band3"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        SpectrumKind::Quantum => {
            let mut c: Vec<String> = (0..config.levels).map(|k| format!("level{k}")).collect();
            c.extend((0..config.levels - 1).map(|k| format!("gap{k}")));
            c
        }
    }
}

fn columns(config: &SpectrumConfig) -> Vec<String> {
    let mut cols: Vec<String> = ["index", "delta", "epsilon", "amplitude", "coupling", "omega"].iter().map(|s| s.to_string()).collect();
    cols.extend(value_columns(config));
    cols.extend(
        ["truncation", "defect", "event", "event_pair", "event_delta", "event_min_gap", "errors"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols
}

fn spectrum(config: &SpectrumConfig, p: &ModelParams) -> rabi_core::Result<SpectrumResult> {
    let schedule = config.schedule();
    match config.kind {
        SpectrumKind::Semiclassical => converged_floquet_spectrum(p, &schedule, config.spectrum_tol),
        SpectrumKind::Quantum => {
            converged_quantum_spectrum(coupling(config, p), p, &schedule, config.levels, config.spectrum_tol)
        }
    }
}

fn coupling(config: &SpectrumConfig, p: &ModelParams) -> f64 {
    config.coupling.unwrap_or(p.amplitude)
}

/// Gaps used for classification: the folded quasienergy gap (Floquet) or
/// the adjacent gaps of the lowest levels (quantum).
fn gaps(s: &SpectrumResult) -> Vec<f64> {
    match s.folded_quasienergies {
        Some(_) => vec![s.quasienergy_gap().unwrap_or(f64::NAN)],
        None => s.adjacent_gaps(),
    }
}

fn values(config: &SpectrumConfig, s: &SpectrumResult) -> Vec<Cell> {
    match config.kind {
        SpectrumKind::Semiclassical => {
            let [lo, hi] = s.folded_quasienergies.expect("floquet spectra carry a folded pair");
            let mut nearest = s.eigenvalues.clone();
            nearest.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
            nearest.truncate(4);
            nearest.sort_by(f64::total_cmp);
            let mut c = vec![Cell::num(lo), Cell::num(hi), Cell::num(gaps(s)[0])];
            c.extend((0..4).map(|k| nearest.get(k).map_or(Cell::Missing, |&x| Cell::num(x))));
            c
        }
        SpectrumKind::Quantum => {
            let mut c: Vec<Cell> = s.eigenvalues.iter().map(|&x| Cell::num(x)).collect();
            c.extend(gaps(s).into_iter().map(Cell::num));
            c
        }
    }
}

/// Classified gap minima along the Δ grid of a spectrum run.
pub fn crossing_events(config: &SpectrumConfig, points: &[ModelParams], sampled: &[Vec<f64>]) -> Vec<CrossingEvent> {
    let base = points[0];
    let grid: Vec<f64> = points.iter().map(|p| p.delta).collect();
    let gap_at = |d: f64| spectrum(config, &base.with_delta(d)).map(|s| gaps(&s)).unwrap_or_default();
    classify_sampled(&grid, sampled, gap_at, config.degeneracy_tol * base.omega)
}

pub fn run(config: &SpectrumConfig, opts: &RunOptions) -> CliResult<(Dataset, Option<Journal>)> {
    config.validate()?;
    let points = config.params.points()?;
    let n_values = value_columns(config).len();
    let hdr = header(
        "spectrum",
        config,
        None,
        json!({
            "schedule": config.schedule(),
            "classification": "local gap minima refined by golden-section search; crossing if the refined gap is below degeneracy_tol*omega",
        }),
    );
    let (rows, journal) = run_journaled(points.len(), &hdr, opts, |i| {
        let p = &points[i];
        let mut cells = vec![
            Cell::Int(i as i64),
            Cell::num(p.delta),
            Cell::num(p.epsilon),
            Cell::num(p.amplitude),
            Cell::num(coupling(config, p)),
            Cell::num(p.omega),
        ];
        match spectrum(config, p) {
            Ok(s) => {
                cells.extend(values(config, &s));
                cells.push(Cell::Int(s.truncation_used as i64));
                cells.push(Cell::num(s.convergence_defect));
                cells.push(Cell::text(""));
            }
            Err(e) => {
                cells.extend(std::iter::repeat(Cell::Missing).take(n_values + 2));
                cells.push(Cell::text(e.to_string()));
            }
        }
        cells
    })?;

    // Classification is a sequential pass over the finished sweep.
    let base_cols = 6;
    let gap_cols: Vec<usize> = match config.kind {
        SpectrumKind::Semiclassical => vec![base_cols + 2],
        SpectrumKind::Quantum => (0..config.levels - 1).map(|k| base_cols + config.levels + k).collect(),
    };
    let sampled: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| gap_cols.iter().map(|&j| r[j].as_f64().unwrap_or(f64::NAN)).collect())
        .collect();
    let events = if points.len() >= 3 { crossing_events(config, &points, &sampled) } else { Vec::new() };

    let mut table = Table::new(columns(config));
    let mut rows = rows;
    for row in rows.iter_mut() {
        let err = row.pop().expect("error cell");
        row.extend([Cell::text(""), Cell::Missing, Cell::Missing, Cell::Missing]);
        row.push(err);
    }
    let width = table.columns.len();
    for ev in &events {
        let row = &mut rows[ev.grid_index];
        let label = match &row[width - 5] {
            Cell::Text(s) if !s.is_empty() => format!("{s}|{}", ev.kind.as_str()),
            _ => ev.kind.as_str().to_string(),
        };
        row[width - 5] = Cell::Text(label);
        // When several pairs have minima at the same grid point, keep the
        // smallest gap's location.
        let replace = match row[width - 2].as_f64() {
            Some(g) => ev.min_gap < g,
            None => true,
        };
        if replace {
            row[width - 4] = Cell::Int(ev.pair as i64);
            row[width - 3] = Cell::num(ev.delta);
            row[width - 2] = Cell::num(ev.min_gap);
        }
    }
    table.rows = rows;
    let flagged = count_flagged(&table);
    let mut hdr = hdr;
    hdr["events"] = json!(events
        .iter()
        .map(|e| json!({"delta": e.delta, "kind": e.kind.as_str(), "pair": e.pair, "min_gap": e.min_gap}))
        .collect::<Vec<_>>());
    Ok((Dataset { header: hdr, table, flagged }, journal))
}
