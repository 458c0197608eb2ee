//! JSON configuration documents for each subcommand. Command-line flags
//! override the corresponding fields after loading.

use std::path::{Path, PathBuf};

use rabi_core::{ModelParams, NumericPolicy};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Documented parameter brackets, in units of ω.
pub const DELTA_RANGE: (f64, f64) = (0.0, 4.5);
pub const EPSILON_RANGE: (f64, f64) = (0.0, 3.0);
pub const AMPLITUDE_RANGE: (f64, f64) = (0.0, 2.0);

fn one() -> f64 {
    1.0
}

fn default_levels() -> usize {
    6
}

fn default_periods() -> usize {
    1
}

fn default_stride() -> usize {
    16
}

fn default_orders() -> Vec<u32> {
    vec![1, 2]
}

fn default_degeneracy_tol() -> f64 {
    1e-6
}

fn default_spectrum_tol() -> f64 {
    rabi_core::floquet::SPECTRUM_TOL
}

/// A fixed value or an inclusive uniform range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Fixed(f64),
    Range { start: f64, stop: f64, count: usize },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Axis::Fixed(x) => vec![x],
            Axis::Range { start, stop, count } => rabi_core::optimize::linspace(start, stop, count),
        }
    }

    pub fn is_swept(&self) -> bool {
        matches!(self, Axis::Range { .. })
    }

    fn validate(&self, name: &str, bracket: (f64, f64)) -> CliResult<()> {
        let check = |x: f64, what: &str| {
            if !x.is_finite() || x < bracket.0 || x > bracket.1 {
                Err(CliError::Config(format!(
                    "{name}.{what} = {x} outside the documented range [{}, {}]",
                    bracket.0, bracket.1
                )))
            } else {
                Ok(())
            }
        };
        match *self {
            Axis::Fixed(x) => check(x, "value"),
            Axis::Range { start, stop, count } => {
                check(start, "start")?;
                check(stop, "stop")?;
                if count < 2 {
                    return Err(CliError::Config(format!("{name}.count must be at least 2, got {count}")));
                }
                if !(stop > start) {
                    return Err(CliError::Config(format!("{name}: stop must exceed start")));
                }
                Ok(())
            }
        }
    }
}

/// Parameter grid of a sweep. Grid order is row-major over
/// (ω, A, ε, Δ), with Δ varying fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    pub delta: Axis,
    pub epsilon: Axis,
    pub amplitude: Axis,
    #[serde(default = "fixed_one")]
    pub omega: Axis,
}

fn fixed_one() -> Axis {
    Axis::Fixed(1.0)
}

impl ParamGrid {
    pub fn validate(&self) -> CliResult<()> {
        self.omega.validate("omega", (f64::MIN_POSITIVE, f64::MAX))?;
        for w in self.omega.values() {
            self.delta.validate("delta", (DELTA_RANGE.0 * w, DELTA_RANGE.1 * w))?;
            self.epsilon.validate("epsilon", (EPSILON_RANGE.0 * w, EPSILON_RANGE.1 * w))?;
            self.amplitude.validate("amplitude", (AMPLITUDE_RANGE.0 * w, AMPLITUDE_RANGE.1 * w))?;
        }
        let swept = self.swept_names();
        if swept.len() > 2 {
            return Err(CliError::Config(format!(
                "at most two symbols may be swept, got {}",
                swept.join(", ")
            )));
        }
        Ok(())
    }

    pub fn swept_names(&self) -> Vec<&'static str> {
        [("delta", self.delta), ("epsilon", self.epsilon), ("amplitude", self.amplitude), ("omega", self.omega)]
            .iter()
            .filter(|(_, a)| a.is_swept())
            .map(|(n, _)| *n)
            .collect()
    }

    /// All grid points in output order.
    pub fn points(&self) -> CliResult<Vec<ModelParams>> {
        let mut out = Vec::new();
        for w in self.omega.values() {
            for a in self.amplitude.values() {
                for e in self.epsilon.values() {
                    for d in self.delta.values() {
                        out.push(ModelParams::new(d, e, a, w)?);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Length of the fastest-varying swept axis (the unwrapping line).
    pub fn line_length(&self) -> usize {
        for axis in [self.delta, self.epsilon, self.amplitude, self.omega] {
            if let Axis::Range { count, .. } = axis {
                return count;
            }
        }
        1
    }
}

/// Single parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    pub delta: f64,
    pub epsilon: f64,
    pub amplitude: f64,
    #[serde(default = "one")]
    pub omega: f64,
}

impl FixedParams {
    pub fn model(&self) -> CliResult<ModelParams> {
        Ok(ModelParams::new(self.delta, self.epsilon, self.amplitude, self.omega)?)
    }
}

/// Optional overrides of the default numeric policy.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitarity_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root_tol: Option<f64>,
}

impl PolicyOverrides {
    /// Overlay `other` (higher precedence) on `self`.
    pub fn merged(&self, other: &PolicyOverrides) -> PolicyOverrides {
        PolicyOverrides {
            step_tol: other.step_tol.or(self.step_tol),
            quad_points: other.quad_points.or(self.quad_points),
            unitarity_tol: other.unitarity_tol.or(self.unitarity_tol),
            root_tol: other.root_tol.or(self.root_tol),
        }
    }

    pub fn resolve(&self) -> CliResult<NumericPolicy> {
        let d = NumericPolicy::default();
        let policy = NumericPolicy {
            step_tol: self.step_tol.unwrap_or(d.step_tol),
            quad_points: self.quad_points.unwrap_or(d.quad_points),
            unitarity_tol: self.unitarity_tol.unwrap_or(d.unitarity_tol),
            root_tol: self.root_tol.unwrap_or(d.root_tol),
        };
        policy.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(policy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Quantities a sweep can report per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    AaPhase,
    Uncertainty,
    Quasienergy,
    PUp,
    Bloch,
    Chrw,
    ChrwPt,
    SpectrumSemiclassical,
    SpectrumQuantum,
    Resonances,
    HiddenSymmetry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub params: ParamGrid,
    pub quantities: Vec<Quantity>,
    #[serde(default)]
    pub policy: PolicyOverrides,
    #[serde(default)]
    pub output: OutputSpec,
    /// Unwrap the numeric AA phases along the fastest swept axis.
    #[serde(default)]
    pub unwrap: bool,
    /// Quantum coupling g for `spectrum_quantum` (defaults to A).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    /// Number of quantum levels reported by `spectrum_quantum`.
    #[serde(default = "default_levels")]
    pub levels: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> CliResult<()> {
        self.params.validate()?;
        if self.quantities.is_empty() {
            return Err(CliError::Config("quantities must not be empty".into()));
        }
        if self.levels < 2 {
            return Err(CliError::Config("levels must be at least 2".into()));
        }
        Ok(())
    }
}

/// Initial state of a dynamics run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSelector {
    CyclicPlus,
    CyclicMinus,
    /// The + cyclic state of the model at a different Δ (cross-initialization).
    CyclicOf { delta: f64 },
    /// Explicit (unnormalized) spinor [[re, im], [re, im]].
    Vector([[f64; 2]; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub params: FixedParams,
    pub state: StateSelector,
    #[serde(default = "default_periods")]
    pub periods: usize,
    /// Write every `stride`-th grid point.
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub policy: PolicyOverrides,
    #[serde(default)]
    pub output: OutputSpec,
}

impl DynamicsConfig {
    pub fn validate(&self) -> CliResult<()> {
        self.params.model()?;
        if self.periods == 0 || self.stride == 0 {
            return Err(CliError::Config("periods and stride must be positive".into()));
        }
        if let StateSelector::CyclicOf { delta } = self.state {
            Axis::Fixed(delta).validate("state.cyclic_of.delta", (DELTA_RANGE.0, DELTA_RANGE.1 * self.params.omega))?;
        }
        if let StateSelector::Vector(v) = self.state {
            let n: f64 = v.iter().flatten().map(|x| x * x).sum();
            if !(n > 0.0 && n.is_finite()) {
                return Err(CliError::Config("state.vector must be a nonzero finite spinor".into()));
            }
        }
        Ok(())
    }
}

/// Resonance-position route names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Numeric,
    Chrw,
    SecondOrder,
    SecondOrderLiteral,
    GapMinimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceBase {
    pub amplitude: f64,
    #[serde(default = "one")]
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceConfig {
    pub base: ResonanceBase,
    pub epsilon: Axis,
    #[serde(default = "default_orders")]
    pub orders: Vec<u32>,
    pub methods: Vec<MethodName>,
    #[serde(default)]
    pub policy: PolicyOverrides,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ResonanceConfig {
    pub fn validate(&self) -> CliResult<()> {
        let w = self.base.omega;
        ModelParams::new(1.0, 0.0, self.base.amplitude, w)?;
        Axis::Fixed(self.base.amplitude).validate("base.amplitude", (0.0, AMPLITUDE_RANGE.1 * w))?;
        self.epsilon.validate("epsilon", (0.0, EPSILON_RANGE.1 * w))?;
        if self.orders.is_empty() || self.orders.iter().any(|&m| m == 0 || m > 2) {
            return Err(CliError::Config("orders must be a non-empty subset of {1, 2}".into()));
        }
        if self.methods.is_empty() {
            return Err(CliError::Config("methods must not be empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Semiclassical,
    Quantum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub kind: SpectrumKind,
    pub params: ParamGrid,
    /// Quantum coupling g (defaults to the amplitude field).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_degeneracy_tol")]
    pub degeneracy_tol: f64,
    #[serde(default = "default_spectrum_tol")]
    pub spectrum_tol: f64,
    /// Truncation schedule; defaults depend on `kind`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<usize>>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl SpectrumConfig {
    pub fn validate(&self) -> CliResult<()> {
        self.params.validate()?;
        let swept = self.params.swept_names();
        if swept.len() > 1 || swept.iter().any(|&s| s != "delta") {
            return Err(CliError::Config("spectrum sweeps only delta".into()));
        }
        if self.levels < 2 {
            return Err(CliError::Config("levels must be at least 2".into()));
        }
        if !(self.degeneracy_tol > 0.0 && self.spectrum_tol > 0.0) {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
        if let Some(s) = &self.schedule {
            if s.len() < 2 || s.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::Config("schedule must be increasing with at least two entries".into()));
            }
        }
        Ok(())
    }

    pub fn schedule(&self) -> Vec<usize> {
        self.schedule.clone().unwrap_or_else(|| match self.kind {
            SpectrumKind::Semiclassical => rabi_core::floquet::default_floquet_schedule(),
            SpectrumKind::Quantum => rabi_core::floquet::default_quantum_schedule(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub params: FixedParams,
    #[serde(default)]
    pub policy: PolicyOverrides,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Parse a JSON config file; errors carry the file name, line and column.
pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}
