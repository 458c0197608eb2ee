//! Model parameters, the instantaneous Hamiltonian and shared conventions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::ComplexMat2;

/// Threshold on |e^{iθ₊} − e^{iθ₋}| below which the two quasienergies are
/// treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// Physical parameters of the driven two-level system (ℏ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Tunneling strength Δ.
    pub delta: f64,
    /// Static bias ε.
    pub epsilon: f64,
    /// Driving amplitude A.
    pub amplitude: f64,
    /// Driving angular frequency ω.
    pub omega: f64,
}

impl ModelParams {
    /// Validated constructor.
    pub fn new(delta: f64, epsilon: f64, amplitude: f64, omega: f64) -> Result<Self> {
        let p = Self { delta, epsilon, amplitude, omega };
        p.validate()?;
        Ok(p)
    }

    /// Convenience constructor with ω = 1.
    pub fn unit(delta: f64, epsilon: f64, amplitude: f64) -> Result<Self> {
        Self::new(delta, epsilon, amplitude, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.delta, self.epsilon, self.amplitude, self.omega]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidParams(format!("omega must be > 0, got {}", self.omega)));
        }
        if self.delta < 0.0 {
            return Err(Error::InvalidParams(format!("delta must be >= 0, got {}", self.delta)));
        }
        if self.amplitude < 0.0 {
            return Err(Error::InvalidParams(format!(
                "amplitude must be >= 0, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }

    /// Driving period T = 2π/ω.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Time-dependent bias ε(t) = ε + A cos ωt.
    pub fn bias_at(&self, t: f64) -> f64 {
        self.epsilon + self.amplitude * (self.omega * t).cos()
    }

    /// Static splitting Ξ₀ = √(Δ² + ε²).
    pub fn static_splitting(&self) -> f64 {
        self.delta.hypot(self.epsilon)
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..*self }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self { amplitude, ..*self }
    }

    /// Bloch-vector field b(t) with H(t) = b·σ.
    pub fn field_at(&self, t: f64) -> [f64; 3] {
        [-0.5 * self.delta, 0.0, -0.5 * self.bias_at(t)]
    }
}

/// Tolerances and grid density shared by the numerical routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericPolicy {
    /// Local error tolerance of the adaptive propagator.
    pub step_tol: f64,
    /// Uniform samples per period (number of grid intervals; even).
    pub quad_points: usize,
    /// Maximum allowed unitarity defect of stored propagators.
    pub unitarity_tol: f64,
    /// Residual tolerance for the self-consistent CHRW equations.
    pub root_tol: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self { step_tol: 1e-12, quad_points: 4096, unitarity_tol: 1e-10, root_tol: 1e-12 }
    }
}

impl NumericPolicy {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("step_tol", self.step_tol),
            ("unitarity_tol", self.unitarity_tol),
            ("root_tol", self.root_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidPolicy(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.quad_points < 256 {
            return Err(Error::InvalidPolicy(format!(
                "quad_points must be >= 256, got {}",
                self.quad_points
            )));
        }
        if self.quad_points % 2 != 0 {
            return Err(Error::InvalidPolicy(format!(
                "quad_points must be even, got {}",
                self.quad_points
            )));
        }
        Ok(())
    }
}

/// H(t) = −(Δ/2)σx − (ε + A cos ωt)/2 σz.
pub fn hamiltonian_at(t: f64, p: &ModelParams) -> ComplexMat2 {
    ComplexMat2::from_pauli(0.0, p.field_at(t))
}

/// The Hamiltonian after the fixed rotation exp(iπσy/4):
/// −(Δ/2)σz + (ε + A cos ωt)/2 σx.
pub fn rotated_frame_hamiltonian(t: f64, p: &ModelParams) -> ComplexMat2 {
    ComplexMat2::from_pauli(0.0, [0.5 * p.bias_at(t), 0.0, -0.5 * p.delta])
}

/// Map an angle into (−π, π].
pub fn wrap_pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Map an angle into [0, 2π).
pub fn wrap_2pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y >= 2.0 * PI {
        0.0
    } else {
        y
    }
}

/// Fold a quasienergy into [−ω/2, ω/2).
pub fn fold_quasienergy(q: f64, omega: f64) -> f64 {
    let y = (q + 0.5 * omega).rem_euclid(omega) - 0.5 * omega;
    if y >= 0.5 * omega {
        y - omega
    } else {
        y
    }
}

/// Distance between two angles on the circle, in [0, π].
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_pi(a - b).abs()
}

/// Remove 2π jumps from a sequence of phases, keeping the first value.
pub fn unwrap_phases(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut offset = 0.0;
    for (i, &v) in values.iter().enumerate() {
        if i > 0 && v.is_finite() {
            if let Some(prev) = values[..i].iter().rev().find(|x| x.is_finite()) {
                let jump = v - prev;
                offset -= 2.0 * PI * (jump / (2.0 * PI)).round();
            }
        }
        out.push(v + offset);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn static_symmetric_hamiltonian() {
        let p = ModelParams::unit(1.0, 0.0, 0.0).unwrap();
        let h = hamiltonian_at(0.0, &p);
        assert_abs_diff_eq!(h.0[0][0].re, 0.0);
        assert_abs_diff_eq!(h.0[0][1].re, -0.5);
        assert_abs_diff_eq!(h.0[1][0].re, -0.5);
        assert_abs_diff_eq!(h.0[1][1].re, 0.0);
    }

    #[test]
    fn biased_driven_hamiltonian_at_origin() {
        let p = ModelParams::unit(1.0, 0.5, 1.0).unwrap();
        let h = hamiltonian_at(0.0, &p);
        assert_abs_diff_eq!(h.0[0][0].re, -0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(h.0[0][1].re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(h.0[1][1].re, 0.75, epsilon = 1e-15);
        let r = rotated_frame_hamiltonian(0.0, &p);
        assert_abs_diff_eq!(r.0[0][0].re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.0[0][1].re, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(r.0[1][1].re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn quarter_period_node_drops_drive() {
        let p = ModelParams::unit(0.7, 0.3, 1.9).unwrap();
        let h = hamiltonian_at(p.period() / 4.0, &p);
        assert_abs_diff_eq!(h.0[0][0].re, -0.15, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModelParams::unit(-1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::unit(1.0, 0.0, -0.1).is_err());
        assert!(ModelParams::unit(f64::NAN, 0.0, 0.0).is_err());
        let bad = NumericPolicy { quad_points: 100, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(NumericPolicy::default().validate().is_ok());
    }

    #[test]
    fn period_times_omega_is_two_pi() {
        let p = ModelParams::new(1.0, 0.0, 0.0, 2.5).unwrap();
        assert_abs_diff_eq!(p.period() * p.omega, 2.0 * PI, epsilon = 1e-15);
    }

    #[test]
    fn branch_maps() {
        assert_abs_diff_eq!(wrap_pi(PI), PI);
        assert_abs_diff_eq!(wrap_pi(-PI), PI);
        assert_abs_diff_eq!(wrap_pi(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_2pi(-0.5), 2.0 * PI - 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(fold_quasienergy(0.5, 1.0), -0.5);
        assert_abs_diff_eq!(fold_quasienergy(-0.5, 1.0), -0.5);
        assert_abs_diff_eq!(fold_quasienergy(1.25, 1.0), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn unwrap_removes_jumps() {
        let v = [0.1, 3.0, -3.0, -2.5, 3.1];
        let u = unwrap_phases(&v);
        assert_abs_diff_eq!(u[2], -3.0 + 2.0 * PI, epsilon = 1e-15);
        assert_abs_diff_eq!(u[3], -2.5 + 2.0 * PI, epsilon = 1e-15);
        assert_abs_diff_eq!(u[4], 3.1, epsilon = 1e-15);
    }
}
