//! `resonance`: harmonic-resonance positions in Δ over a range of biases,
//! by each requested method.

use rabi_core::chrw::RabiConvention;
use rabi_core::resonance::{resonance_position, ResonanceMethod};
use rabi_core::{ModelParams, NumericPolicy};
use serde_json::json;

use super::{count_flagged, header, run_journaled, Dataset, RunOptions};
use crate::config::{MethodName, PolicyOverrides, ResonanceConfig};
use crate::error::CliResult;
use crate::journal::Journal;
use crate::output::{Cell, Table};

pub fn method(name: MethodName) -> ResonanceMethod {
    match name {
        MethodName::Numeric => ResonanceMethod::Numeric,
        MethodName::Chrw => ResonanceMethod::Chrw,
        MethodName::SecondOrder => ResonanceMethod::SecondOrder(RabiConvention::Squared),
        MethodName::SecondOrderLiteral => ResonanceMethod::SecondOrder(RabiConvention::Literal),
        MethodName::GapMinimum => ResonanceMethod::GapMinimum,
    }
}

/// Column name of the position for order m by a method.
pub fn position_column(order: u32, name: MethodName) -> String {
    format!("order{order}_{}", method(name).name())
}

fn columns(config: &ResonanceConfig) -> Vec<String> {
    let mut cols: Vec<String> = ["epsilon", "amplitude", "omega"].iter().map(|s| s.to_string()).collect();
    for &m in &config.orders {
        for &name in &config.methods {
            cols.push(position_column(m, name));
        }
    }
    cols.extend(["root_tol", "quad_points", "errors"].iter().map(|s| s.to_string()));
    cols
}

fn evaluate(config: &ResonanceConfig, epsilon: f64, policy: &NumericPolicy) -> Vec<Cell> {
    let base = ModelParams::new(1.0, epsilon, config.base.amplitude, config.base.omega).expect("validated base");
    let mut cells = vec![Cell::num(epsilon), Cell::num(base.amplitude), Cell::num(base.omega)];
    let mut errors = Vec::new();
    for &m in &config.orders {
        for &name in &config.methods {
            match resonance_position(&base, m, method(name), policy) {
                Ok(d) => cells.push(Cell::num(d)),
                Err(e) => {
                    errors.push(format!("{}: {e}", position_column(m, name)));
                    cells.push(Cell::Missing);
                }
            }
        }
    }
    cells.push(Cell::num(policy.root_tol));
    cells.push(Cell::Int(policy.quad_points as i64));
    cells.push(Cell::text(errors.join("; ")));
    cells
}

pub fn run(config: &ResonanceConfig, flags: &PolicyOverrides, opts: &RunOptions) -> CliResult<(Dataset, Option<Journal>)> {
    config.validate()?;
    let policy = config.policy.merged(flags).resolve()?;
    let mut resolved = config.clone();
    resolved.policy = config.policy.merged(flags);
    let eps = config.epsilon.values();
    let hdr = header(
        "resonance",
        &resolved,
        Some(&policy),
        json!({
            "orders": "order m locates the harmonic with modulated Rabi frequency m*omega (1: second harmonic, 2: third)",
            "second_order_convention": "second_order treats the estimate as the squared frequency; second_order_literal uses it as printed",
        }),
    );
    let (rows, journal) = run_journaled(eps.len(), &hdr, opts, |i| evaluate(config, eps[i], &policy))?;
    let mut table = Table::new(columns(config));
    table.rows = rows;
    let flagged = count_flagged(&table);
    Ok((Dataset { header: hdr, table, flagged }, journal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse;

    #[test]
    fn single_bias_matches_library() {
        let cfg: ResonanceConfig =
            parse(r#"{"base": {"amplitude": 1}, "epsilon": 0.3, "orders": [1], "methods": ["chrw", "second_order"]}"#).unwrap();
        let opts = RunOptions { jobs: 1, ..Default::default() };
        let (ds, _) = run(&cfg, &PolicyOverrides::default(), &opts).unwrap();
        assert_eq!(ds.table.rows.len(), 1);
        let direct = resonance_position(
            &ModelParams::unit(1.0, 0.3, 1.0).unwrap(),
            1,
            ResonanceMethod::Chrw,
            &NumericPolicy::default(),
        )
        .unwrap();
        let j = ds.table.column_index("order1_chrw").unwrap();
        assert_eq!(ds.table.rows[0][j], Cell::num(direct));
        assert_eq!(ds.exit_code(), 0);
    }
}
