//! Numerical analysis of the driven asymmetric two-level system
//!
//! H(t) = −(Δ/2)σx − (ε + A cos ωt)/2 σz
//!
//! Three independent routes are provided and cross-checked against each other:
//!
//! * exact unitary propagation over one period ([`propagator`]) followed by
//!   cyclic-state geometry ([`geometry`]): Aharonov–Anandan phases, dynamical
//!   phases, time–energy uncertainty, Bloch trajectories and populations;
//! * the counter-rotating-hybridized rotating-wave (CHRW) analytic method
//!   ([`chrw`]) with its first-order second-harmonic correction
//!   ([`perturbation`]);
//! * truncated Floquet / quantum-Rabi matrices ([`floquet`]) for quasienergy
//!   spectra, crossing classification and hidden-symmetry detection.
//!
//! Harmonic-resonance locations are searched by [`resonance`].

pub mod bessel;
pub mod chrw;
pub mod error;
pub mod floquet;
pub mod geometry;
pub mod mat2;
pub mod model;
pub mod optimize;
pub mod perturbation;
pub mod propagator;
pub mod quadrature;
pub mod resonance;

pub use error::{Error, Result};
pub use mat2::{ComplexMat2, Spinor};
pub use model::{ModelParams, NumericPolicy};
