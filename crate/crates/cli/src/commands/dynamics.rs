//! `dynamics`: P_up(t), Bloch vector and accumulated path length for a
//! chosen initial state over several periods.

use num_complex::Complex64;
use rabi_core::geometry::{aa_phases, bloch_trajectory, population_up};
use rabi_core::mat2::{normalize, Spinor};
use rabi_core::propagator::{propagate, propagate_interval};
use rabi_core::{ModelParams, NumericPolicy};
use serde_json::json;

use super::{header, Dataset};
use crate::config::{DynamicsConfig, PolicyOverrides, StateSelector};
use crate::error::CliResult;
use crate::output::{Cell, Table};

/// Resolve the initial state. Cyclic branches use the default labels of
/// the exact decomposition (the + state has θ ∈ [0, π]).
pub fn initial_state(p: &ModelParams, selector: &StateSelector, policy: &NumericPolicy) -> CliResult<Spinor> {
    let cyclic = |q: &ModelParams, k: usize| -> CliResult<Spinor> {
        let r = propagate(q, policy)?;
        Ok(aa_phases(&r, q).cyclic_states[k])
    };
    Ok(match selector {
        StateSelector::CyclicPlus => cyclic(p, 0)?,
        StateSelector::CyclicMinus => cyclic(p, 1)?,
        StateSelector::CyclicOf { delta } => cyclic(&p.with_delta(*delta), 0)?,
        StateSelector::Vector(v) => normalize([Complex64::new(v[0][0], v[0][1]), Complex64::new(v[1][0], v[1][1])]),
    })
}

pub fn run(config: &DynamicsConfig, flags: &PolicyOverrides) -> CliResult<Dataset> {
    config.validate()?;
    let policy = config.policy.merged(flags).resolve()?;
    let p = config.params.model()?;
    let state = initial_state(&p, &config.state, &policy)?;
    let r = propagate_interval(&p, &policy, 0.0, config.periods as f64 * p.period(), config.periods * policy.quad_points)?;
    let traj = bloch_trajectory(&r, &state);
    let pops = population_up(&r, &state);

    let mut table = Table::new(
        ["t", "p_up", "bloch_x", "bloch_y", "bloch_z", "path_length"].iter().map(|s| s.to_string()).collect(),
    );
    let last = r.grid.len() - 1;
    for k in (0..=last).filter(|k| k % config.stride == 0 || *k == last) {
        let b = traj.points[k];
        table.rows.push(vec![
            Cell::num(r.grid[k]),
            Cell::num(pops[k].1),
            Cell::num(b[0]),
            Cell::num(b[1]),
            Cell::num(b[2]),
            Cell::num(traj.cumulative_length[k]),
        ]);
    }
    let mut resolved = config.clone();
    resolved.policy = config.policy.merged(flags);
    let hdr = header(
        "dynamics",
        &resolved,
        Some(&policy),
        json!({
            "initial_state": [[state[0].re, state[0].im], [state[1].re, state[1].im]],
            "summary": {
                "endpoint_distance": traj.endpoint_distance(),
                "total_path_length": traj.path_length,
                "max_unitarity_defect": r.max_unitarity_defect,
            },
        }),
    );
    Ok(Dataset { header: hdr, table, flagged: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FixedParams;

    #[test]
    fn undriven_basis_state_is_stationary() {
        let cfg = DynamicsConfig {
            params: FixedParams { delta: 0.0, epsilon: 0.7, amplitude: 0.0, omega: 1.0 },
            state: StateSelector::Vector([[1.0, 0.0], [0.0, 0.0]]),
            periods: 2,
            stride: 64,
            policy: PolicyOverrides::default(),
            output: Default::default(),
        };
        let ds = run(&cfg, &PolicyOverrides::default()).unwrap();
        for row in &ds.table.rows {
            let v = |k: usize| row[k].as_f64().unwrap();
            assert!((v(1) - 1.0).abs() < 1e-14);
            assert!((v(4) - 1.0).abs() < 1e-14);
            assert!(v(5).abs() < 1e-7);
        }
        let t_end = ds.table.rows.last().unwrap()[0].as_f64().unwrap();
        assert!((t_end - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
