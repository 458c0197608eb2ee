//! `check`: run the invariant suite at one parameter point.

use rabi_core::chrw::solve_self_consistent;
use rabi_core::floquet::{converged_floquet_spectrum, default_floquet_schedule, SPECTRUM_TOL};
use rabi_core::geometry::{aa_phases, bloch_trajectory};
use rabi_core::model::fold_quasienergy;
use rabi_core::propagator::{propagate, verify_su2_structure};
use serde_json::json;

use super::{header, Dataset};
use crate::config::{CheckConfig, PolicyOverrides};
use crate::error::CliResult;
use crate::output::{Cell, Table};

/// One evaluated invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckItem {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl CheckItem {
    pub fn passed(&self) -> bool {
        self.value.is_finite() && self.value <= self.tolerance
    }
}

fn circle(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Evaluate the invariants. Propagation failure is a hard error; CHRW and
/// Floquet failures are reported as failed items.
pub fn invariants(config: &CheckConfig, flags: &PolicyOverrides) -> CliResult<Vec<CheckItem>> {
    let policy = config.policy.merged(flags).resolve()?;
    let p = config.params.model()?;
    let r = propagate(&p, &policy)?;
    let g = aa_phases(&r, &p);
    let traj = bloch_trajectory(&r, &g.cyclic_states[0]);
    let mut items = vec![
        CheckItem { name: "su2_defect", value: verify_su2_structure(&r), tolerance: policy.unitarity_tol },
        CheckItem { name: "unitarity_defect", value: r.max_unitarity_defect, tolerance: policy.unitarity_tol },
    ];
    if !g.degenerate_flag {
        items.extend([
            CheckItem { name: "total_phase_complementarity", value: g.total_phase_complementarity(), tolerance: 1e-8 },
            CheckItem {
                name: "dynamical_phase_sum",
                value: (g.dynamical_phases[0] + g.dynamical_phases[1]).abs(),
                tolerance: 1e-8,
            },
            CheckItem { name: "aa_phase_complementarity", value: g.aa_phase_complementarity(), tolerance: 1e-8 },
            CheckItem { name: "orthogonality", value: g.orthogonality_defect(), tolerance: 1e-8 },
            CheckItem {
                name: "uncertainty_branch_equality",
                value: (g.uncertainties[0] - g.uncertainties[1]).abs(),
                tolerance: 1e-8,
            },
            CheckItem {
                name: "uncertainty_vs_path_length",
                value: (g.uncertainty - traj.path_length).abs(),
                tolerance: 1e-6,
            },
            CheckItem { name: "cyclic_endpoint_distance", value: traj.endpoint_distance(), tolerance: 1e-6 },
        ]);
    }
    let floquet = converged_floquet_spectrum(&p, &default_floquet_schedule(), SPECTRUM_TOL)
        .ok()
        .and_then(|s| s.folded_quasienergies)
        .map(|f| {
            let q = g.quasienergies.map(|x| fold_quasienergy(x, p.omega));
            let direct = circle(q[0], f[0], p.omega).max(circle(q[1], f[1], p.omega));
            let crossed = circle(q[0], f[1], p.omega).max(circle(q[1], f[0], p.omega));
            direct.min(crossed) / p.omega
        })
        .unwrap_or(f64::NAN);
    items.push(CheckItem { name: "floquet_vs_propagator", value: floquet, tolerance: 1e-7 });
    if p.delta != 0.0 || p.epsilon != 0.0 {
        let res = solve_self_consistent(&p, &policy).map(|s| s.residuals[0].abs().max(s.residuals[1].abs())).unwrap_or(f64::NAN);
        items.push(CheckItem { name: "chrw_residual", value: res, tolerance: policy.root_tol });
    }
    Ok(items)
}

pub fn run(config: &CheckConfig, flags: &PolicyOverrides) -> CliResult<Dataset> {
    let items = invariants(config, flags)?;
    let policy = config.policy.merged(flags).resolve()?;
    let mut resolved = config.clone();
    resolved.policy = config.policy.merged(flags);
    let mut table = Table::new(["check", "value", "tolerance", "pass"].iter().map(|s| s.to_string()).collect());
    for it in &items {
        table.rows.push(vec![Cell::text(it.name), Cell::num(it.value), Cell::num(it.tolerance), Cell::Bool(it.passed())]);
    }
    let failed = items.iter().filter(|i| !i.passed()).count();
    let hdr = header("check", &resolved, Some(&policy), json!({"failed": failed}));
    Ok(Dataset { header: hdr, table, flagged: failed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FixedParams;

    #[test]
    fn generic_point_passes() {
        let cfg = CheckConfig {
            params: FixedParams { delta: 1.1, epsilon: 0.4, amplitude: 1.2, omega: 1.0 },
            policy: PolicyOverrides::default(),
            output: Default::default(),
        };
        let ds = run(&cfg, &PolicyOverrides::default()).unwrap();
        assert_eq!(ds.flagged, 0, "{:?}", ds.table.rows);
        assert_eq!(ds.table.rows.len(), 11);
    }
}
