//! Batch front end for `rabi-core`: parameter sweeps, dynamics traces,
//! resonance scans, spectra and invariant checks, written as deterministic
//! CSV or JSON datasets.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod journal;
pub mod output;

pub use error::{CliError, CliResult};
