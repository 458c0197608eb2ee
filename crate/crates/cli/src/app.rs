//! Argument parsing and command dispatch shared by the `rabi` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use crate::commands::{self, Dataset, RunOptions};
use crate::config::{self, CheckConfig, FixedParams, Format, OutputSpec, PolicyOverrides};
use crate::{CliError, CliResult};

/// Geometric phases, uncertainty, resonances and spectra of the driven
/// asymmetric two-level model.
///
/// Settings are read from a JSON config; command-line flags take precedence
/// over config fields, which take precedence over built-in defaults.
///
/// Exit codes: 0 success, 2 config error, 3 some rows flagged, 4 hard
/// numeric or i/o failure.
#[derive(Parser)]
#[command(name = "rabi", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-point quantities over a parameter grid.
    Sweep(Common),
    /// Time evolution of one initial state.
    Dynamics(Common),
    /// Resonance positions over a range of biases.
    Resonance(Common),
    /// Converged (quasi)energy spectra with crossing classification.
    Spectrum(Common),
    /// Invariant suite at one parameter point.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        amplitude: Option<f64>,
        #[arg(long)]
        omega: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (default csv).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads for sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    /// Local error tolerance of the adaptive propagator.
    #[arg(long = "tol-step")]
    tol_step: Option<f64>,
    /// Maximum allowed unitarity defect.
    #[arg(long = "tol-unitarity")]
    tol_unitarity: Option<f64>,
    /// Residual tolerance of the CHRW root solver.
    #[arg(long = "tol-root")]
    tol_root: Option<f64>,
    /// Uniform time samples per period (even).
    #[arg(long = "quad-points")]
    quad_points: Option<usize>,
    /// Unwrap AA phases along the fastest swept axis.
    #[arg(long)]
    unwrap: bool,
    /// Resume from the journal next to the output file.
    #[arg(long)]
    resume: bool,
}

impl Common {
    fn policy(&self) -> PolicyOverrides {
        PolicyOverrides {
            step_tol: self.tol_step,
            quad_points: self.quad_points,
            unitarity_tol: self.tol_unitarity,
            root_tol: self.tol_root,
        }
    }

    fn options(&self, output: &OutputSpec) -> CliResult<RunOptions> {
        let defaults = RunOptions::default();
        let jobs = self.jobs.unwrap_or(defaults.jobs);
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        Ok(RunOptions {
            jobs,
            resume: self.resume,
            out: self.out.clone().or_else(|| output.path.clone()),
            format: self.format.unwrap_or(output.format),
        })
    }

    fn load<T: serde::de::DeserializeOwned>(&self) -> CliResult<T> {
        match &self.config {
            Some(path) => config::load(path),
            None => Err(CliError::Config("--config is required".into())),
        }
    }
}

/// Executes one parsed invocation and returns the process exit code.
pub fn run(cli: Cli) -> CliResult<i32> {
    let (dataset, journal, opts): (Dataset, _, RunOptions) = match &cli.command {
        Command::Sweep(c) => {
            let mut cfg: config::SweepConfig = c.load()?;
            cfg.unwrap |= c.unwrap;
            let opts = c.options(&cfg.output)?;
            let (ds, j) = commands::sweep::run(&cfg, &c.policy(), &opts)?;
            (ds, j, opts)
        }
        Command::Dynamics(c) => {
            let cfg: config::DynamicsConfig = c.load()?;
            let opts = c.options(&cfg.output)?;
            (commands::dynamics::run(&cfg, &c.policy())?, None, opts)
        }
        Command::Resonance(c) => {
            let cfg: config::ResonanceConfig = c.load()?;
            let opts = c.options(&cfg.output)?;
            let (ds, j) = commands::resonance::run(&cfg, &c.policy(), &opts)?;
            (ds, j, opts)
        }
        Command::Spectrum(c) => {
            let cfg: config::SpectrumConfig = c.load()?;
            let opts = c.options(&cfg.output)?;
            let (ds, j) = commands::spectrum::run(&cfg, &opts)?;
            (ds, j, opts)
        }
        Command::Check { common, delta, epsilon, amplitude, omega } => {
            let mut cfg: CheckConfig = match &common.config {
                Some(_) => common.load()?,
                None => CheckConfig {
                    params: FixedParams { delta: f64::NAN, epsilon: f64::NAN, amplitude: f64::NAN, omega: 1.0 },
                    policy: PolicyOverrides::default(),
                    output: OutputSpec::default(),
                },
            };
            let fp = &mut cfg.params;
            fp.delta = delta.unwrap_or(fp.delta);
            fp.epsilon = epsilon.unwrap_or(fp.epsilon);
            fp.amplitude = amplitude.unwrap_or(fp.amplitude);
            fp.omega = omega.unwrap_or(fp.omega);
            if [fp.delta, fp.epsilon, fp.amplitude].iter().any(|x| x.is_nan()) {
                return Err(CliError::Config("check needs --config or --delta, --epsilon and --amplitude".into()));
            }
            fp.model().map_err(|e| CliError::Config(e.to_string()))?;
            let opts = common.options(&cfg.output)?;
            (commands::check::run(&cfg, &common.policy())?, None, opts)
        }
    };
    commands::finish(&dataset, journal, &opts)?;
    if dataset.flagged > 0 {
        eprintln!("rabi: {} row(s) flagged", dataset.flagged);
    }
    Ok(dataset.exit_code())
}
