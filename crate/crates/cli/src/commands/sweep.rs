//! `sweep`: per-point geometric, analytic and spectral quantities over a
//! one- or two-dimensional parameter grid.

use std::cell::OnceCell;

use rabi_core::chrw::{solve_self_consistent, ChrwSolution};
use rabi_core::floquet::{
    converged_floquet_spectrum, converged_quantum_spectrum, default_floquet_schedule, default_quantum_schedule,
    hidden_symmetry_check, SPECTRUM_TOL,
};
use rabi_core::geometry::{
    aa_phases, aa_phases_with_reference, bloch_trajectory, population_up, GeometricResult,
};
use rabi_core::perturbation::{first_order_correction, perturbed_cyclic_state_lab, PerturbationResult};
use rabi_core::propagator::{propagate, PropagationResult};
use rabi_core::resonance::chrw_resonance;
use rabi_core::{ModelParams, NumericPolicy};
use serde_json::json;

use super::{count_flagged, header, run_journaled, Dataset, RunOptions};
use crate::config::{PolicyOverrides, Quantity, SweepConfig};
use crate::error::CliResult;
use crate::journal::Journal;
use crate::output::{Cell, Table};

/// Columns contributed by one quantity.
pub fn quantity_columns(q: Quantity, levels: usize) -> Vec<String> {
    let fixed: &[&str] = match q {
        Quantity::AaPhase => &[
            "gamma_plus",
            "gamma_minus",
            "theta_plus",
            "theta_minus",
            "alpha_plus",
            "alpha_minus",
            "degenerate",
            "branch_label",
        ],
        Quantity::Uncertainty => &["uncertainty"],
        Quantity::Quasienergy => &["q_plus", "q_minus"],
        Quantity::PUp => &["p_up_mean", "p_up_min", "p_up_max"],
        Quantity::Bloch => &["path_length", "endpoint_distance"],
        Quantity::Chrw => &[
            "xi",
            "zeta",
            "omega_chrw",
            "detuning_chrw",
            "theta_chrw",
            "alpha_chrw",
            "gamma_chrw",
            "above_validity_ceiling",
        ],
        Quantity::ChrwPt => &["k", "ky", "kx", "kz", "theta_pt", "omega_pt", "alpha_pt", "gamma_pt", "gamma_pt_wrapped", "pt_singular"],
        Quantity::SpectrumSemiclassical => {
            &["fq_low", "fq_high", "fq_gap", "band0", "band1", "band2", "band3", "floquet_truncation", "floquet_defect"]
        }
        Quantity::SpectrumQuantum => {
            let mut cols: Vec<String> = (0..levels).map(|k| format!("level{k}")).collect();
            cols.push("fock_truncation".into());
            cols.push("fock_defect".into());
            return cols;
        }
        Quantity::Resonances => &["resonance_chrw_1", "resonance_chrw_2"],
        Quantity::HiddenSymmetry => &["bias_integer", "phase_gap", "identity_distance", "not_unique"],
    };
    fixed.iter().map(|s| s.to_string()).collect()
}

const POINT_COLUMNS: [&str; 5] = ["index", "delta", "epsilon", "amplitude", "omega"];
const TRAILER_COLUMNS: [&str; 5] = ["step_tol", "quad_points", "unitarity_tol", "root_tol", "errors"];

/// All columns of a sweep with the given quantities.
pub fn sweep_columns(quantities: &[Quantity], levels: usize) -> Vec<String> {
    let mut cols: Vec<String> = POINT_COLUMNS.iter().map(|s| s.to_string()).collect();
    for &q in quantities {
        cols.extend(quantity_columns(q, levels));
    }
    cols.extend(TRAILER_COLUMNS.iter().map(|s| s.to_string()));
    cols
}

/// Lazily computed shared results for one grid point.
struct Point<'a> {
    p: ModelParams,
    policy: &'a NumericPolicy,
    propagation: OnceCell<Result<PropagationResult, String>>,
    chrw: OnceCell<Result<ChrwSolution, String>>,
    correction: OnceCell<Result<PerturbationResult, String>>,
    geometry: OnceCell<Result<(GeometricResult, &'static str), String>>,
}

impl<'a> Point<'a> {
    fn new(p: ModelParams, policy: &'a NumericPolicy) -> Self {
        Self {
            p,
            policy,
            propagation: OnceCell::new(),
            chrw: OnceCell::new(),
            correction: OnceCell::new(),
            geometry: OnceCell::new(),
        }
    }

    fn propagation(&self) -> Result<&PropagationResult, String> {
        self.propagation
            .get_or_init(|| propagate(&self.p, self.policy).map_err(|e| format!("propagation: {e}")))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn chrw(&self) -> Result<&ChrwSolution, String> {
        self.chrw
            .get_or_init(|| solve_self_consistent(&self.p, self.policy).map_err(|e| format!("chrw: {e}")))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn correction(&self) -> Result<&PerturbationResult, String> {
        self.correction
            .get_or_init(|| self.chrw().map(first_order_correction))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Exact cyclic-state geometry. The + branch is the one overlapping most
    /// with the CHRW+PT cyclic state when that is available, which keeps the
    /// labels aligned with the analytic curves across resonances.
    fn geometry(&self) -> Result<&(GeometricResult, &'static str), String> {
        self.geometry
            .get_or_init(|| {
                let r = self.propagation()?;
                Ok(match self.correction() {
                    Ok(pt) => {
                        let sol = self.chrw().expect("correction implies solution");
                        let reference = perturbed_cyclic_state_lab(sol, pt.k);
                        (aa_phases_with_reference(r, &self.p, &reference), "pt_overlap")
                    }
                    Err(_) => (aa_phases(r, &self.p), "canonical"),
                })
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

fn quantity_cells(q: Quantity, pt: &Point, levels: usize, coupling: Option<f64>) -> Result<Vec<Cell>, String> {
    let p = &pt.p;
    Ok(match q {
        Quantity::AaPhase => {
            let (g, label) = pt.geometry()?;
            vec![
                Cell::num(g.aa_phases[0]),
                Cell::num(g.aa_phases[1]),
                Cell::num(g.total_phases[0]),
                Cell::num(g.total_phases[1]),
                Cell::num(g.dynamical_phases[0]),
                Cell::num(g.dynamical_phases[1]),
                Cell::Bool(g.degenerate_flag),
                Cell::text(*label),
            ]
        }
        Quantity::Uncertainty => vec![Cell::num(pt.geometry()?.0.uncertainty)],
        Quantity::Quasienergy => {
            let g = &pt.geometry()?.0;
            vec![Cell::num(g.quasienergies[0]), Cell::num(g.quasienergies[1])]
        }
        Quantity::PUp => {
            let r = pt.propagation()?;
            let state = pt.geometry()?.0.cyclic_states[0];
            let pops: Vec<f64> = population_up(r, &state).into_iter().map(|(_, v)| v).collect();
            let mean = rabi_core::quadrature::simpson(&pops, r.spacing()) / p.period();
            let min = pops.iter().copied().fold(f64::INFINITY, f64::min);
            let max = pops.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            vec![Cell::num(mean), Cell::num(min), Cell::num(max)]
        }
        Quantity::Bloch => {
            let traj = bloch_trajectory(pt.propagation()?, &pt.geometry()?.0.cyclic_states[0]);
            vec![Cell::num(traj.path_length), Cell::num(traj.endpoint_distance())]
        }
        Quantity::Chrw => {
            let s = pt.chrw()?;
            let ph = s.phases();
            vec![
                Cell::num(s.xi),
                Cell::num(s.zeta),
                Cell::num(s.omega_t),
                Cell::num(s.delta_det),
                Cell::num(ph.total[0]),
                Cell::num(ph.dynamical[0]),
                Cell::num(ph.aa[0]),
                Cell::Bool(s.above_validity_ceiling),
            ]
        }
        Quantity::ChrwPt => {
            let c = pt.correction()?;
            vec![
                Cell::num(c.k),
                Cell::num(c.ky),
                Cell::num(c.kx),
                Cell::num(c.kz),
                Cell::num(c.theta_pt),
                Cell::num(c.omega_pt),
                Cell::num(c.alpha_pt),
                Cell::num(c.gamma_pt[0]),
                Cell::num(c.gamma_pt_wrapped[0]),
                Cell::Bool(c.singular_flags.any()),
            ]
        }
        Quantity::SpectrumSemiclassical => {
            let s = converged_floquet_spectrum(p, &default_floquet_schedule(), SPECTRUM_TOL)
                .map_err(|e| format!("floquet: {e}"))?;
            let [lo, hi] = s.folded_quasienergies.expect("floquet spectra carry a folded pair");
            let mut nearest = s.eigenvalues.clone();
            nearest.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
            nearest.truncate(4);
            nearest.sort_by(f64::total_cmp);
            let mut cells = vec![Cell::num(lo), Cell::num(hi), Cell::num(s.quasienergy_gap().unwrap_or(f64::NAN))];
            cells.extend((0..4).map(|k| nearest.get(k).map_or(Cell::Missing, |&x| Cell::num(x))));
            cells.push(Cell::Int(s.truncation_used as i64));
            cells.push(Cell::num(s.convergence_defect));
            cells
        }
        Quantity::SpectrumQuantum => {
            let g = coupling.unwrap_or(p.amplitude);
            let s = converged_quantum_spectrum(g, p, &default_quantum_schedule(), levels, SPECTRUM_TOL)
                .map_err(|e| format!("quantum spectrum: {e}"))?;
            let mut cells: Vec<Cell> = s.eigenvalues.iter().map(|&x| Cell::num(x)).collect();
            cells.push(Cell::Int(s.truncation_used as i64));
            cells.push(Cell::num(s.convergence_defect));
            cells
        }
        Quantity::Resonances => [1, 2]
            .iter()
            .map(|&m| chrw_resonance(p, m, pt.policy).map_or(Cell::Missing, Cell::num))
            .collect(),
        Quantity::HiddenSymmetry => {
            let rep = hidden_symmetry_check(p, pt.propagation()?);
            vec![
                Cell::Bool(rep.bias_integer),
                Cell::num(rep.phase_gap),
                Cell::num(rep.identity_distance),
                Cell::Bool(rep.not_unique),
            ]
        }
    })
}

/// All cells of one sweep row.
pub fn evaluate_point(
    index: usize,
    p: &ModelParams,
    quantities: &[Quantity],
    policy: &NumericPolicy,
    levels: usize,
    coupling: Option<f64>,
) -> Vec<Cell> {
    let pt = Point::new(*p, policy);
    let mut cells = vec![
        Cell::Int(index as i64),
        Cell::num(p.delta),
        Cell::num(p.epsilon),
        Cell::num(p.amplitude),
        Cell::num(p.omega),
    ];
    let mut errors: Vec<String> = Vec::new();
    for &q in quantities {
        let width = quantity_columns(q, levels).len();
        match quantity_cells(q, &pt, levels, coupling) {
            Ok(c) => {
                if c.iter().any(|x| *x == Cell::Missing) && q != Quantity::Resonances {
                    errors.push(format!("{q:?}: non-finite value"));
                }
                cells.extend(c);
            }
            Err(e) => {
                if !errors.contains(&e) {
                    errors.push(e);
                }
                cells.extend(std::iter::repeat(Cell::Missing).take(width));
            }
        }
    }
    cells.extend([
        Cell::num(policy.step_tol),
        Cell::Int(policy.quad_points as i64),
        Cell::num(policy.unitarity_tol),
        Cell::num(policy.root_tol),
        Cell::text(errors.join("; ")),
    ]);
    cells
}

/// Run a sweep. Returns the dataset and the journal to be removed once the
/// dataset has been written.
pub fn run(config: &SweepConfig, flags: &PolicyOverrides, opts: &RunOptions) -> CliResult<(Dataset, Option<Journal>)> {
    config.validate()?;
    let policy = config.policy.merged(flags).resolve()?;
    let mut resolved = config.clone();
    resolved.policy = config.policy.merged(flags);
    let points = config.params.points()?;
    let hdr = header(
        "sweep",
        &resolved,
        Some(&policy),
        json!({
            "grid_order": "row-major over (omega, amplitude, epsilon, delta), delta fastest",
            "branch_labels": "pt_overlap: + branch overlaps most with the CHRW+PT cyclic state; canonical: + branch has theta in [0, pi]",
        }),
    );
    let (rows, journal) = run_journaled(points.len(), &hdr, opts, |i| {
        evaluate_point(i, &points[i], &config.quantities, &policy, config.levels, config.coupling)
    })?;
    let mut table = Table::new(sweep_columns(&config.quantities, config.levels));
    table.rows = rows;
    if config.unwrap {
        let line = config.params.line_length();
        for col in ["gamma_plus", "gamma_minus"] {
            table.unwrap_column(col, line);
        }
    }
    let flagged = count_flagged(&table);
    Ok((Dataset { header: hdr, table, flagged }, journal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse, Axis};

    #[test]
    fn row_width_matches_columns() {
        let all = [
            Quantity::AaPhase,
            Quantity::Uncertainty,
            Quantity::Quasienergy,
            Quantity::PUp,
            Quantity::Bloch,
            Quantity::Chrw,
            Quantity::ChrwPt,
            Quantity::SpectrumSemiclassical,
            Quantity::SpectrumQuantum,
            Quantity::Resonances,
            Quantity::HiddenSymmetry,
        ];
        let p = ModelParams::unit(1.3, 0.5, 1.0).unwrap();
        let row = evaluate_point(0, &p, &all, &NumericPolicy::default(), 4, None);
        assert_eq!(row.len(), sweep_columns(&all, 4).len());
        assert_eq!(row.last(), Some(&Cell::text("")));
    }

    #[test]
    fn failures_are_recorded_in_row() {
        // Δ = ε = 0 has no CHRW solution; the propagator route still works.
        let p = ModelParams::unit(0.0, 0.0, 1.0).unwrap();
        let row = evaluate_point(0, &p, &[Quantity::Uncertainty, Quantity::Chrw], &NumericPolicy::default(), 6, None);
        let cols = sweep_columns(&[Quantity::Uncertainty, Quantity::Chrw], 6);
        let at = |name: &str| &row[cols.iter().position(|c| c == name).unwrap()];
        assert!(matches!(at("uncertainty"), Cell::Num(_)));
        assert_eq!(at("xi"), &Cell::Missing);
        assert!(matches!(at("errors"), Cell::Text(s) if s.starts_with("chrw")));
    }

    #[test]
    fn single_point_sweep() {
        let cfg: SweepConfig = parse(r#"{"params": {"delta": 1.2, "epsilon": 0.3, "amplitude": 1}, "quantities": ["uncertainty"]}"#).unwrap();
        let opts = RunOptions { jobs: 1, ..Default::default() };
        let (ds, journal) = run(&cfg, &PolicyOverrides::default(), &opts).unwrap();
        assert!(journal.is_none());
        assert_eq!(ds.table.rows.len(), 1);
        assert_eq!(ds.exit_code(), 0);
        assert_eq!(cfg.params.delta, Axis::Fixed(1.2));
    }
}
