//! Cyclic states, phases, time–energy uncertainty and Bloch trajectories
//! extracted from a one-period propagation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat2::{bloch_vector, inner, ComplexMat2, Spinor};
use crate::model::{fold_quasienergy, wrap_2pi, wrap_pi, ModelParams, DEGENERACY_TOL};
use crate::propagator::PropagationResult;
use crate::quadrature::simpson;

/// Eigen-decomposition of the one-period propagator U(T).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclicDecomposition {
    /// |ψ₊(0)⟩, |ψ₋(0)⟩.
    pub states: [Spinor; 2],
    /// θ± ∈ (−π, π], with U(T)|ψ±⟩ = e^{iθ±}|ψ±⟩.
    pub total_phases: [f64; 2],
    /// q± = −θ±/T folded into [−ω/2, ω/2).
    pub quasienergies: [f64; 2],
    /// Set when |e^{iθ₊} − e^{iθ₋}| < degeneracy tolerance.
    pub degenerate: bool,
}

impl CyclicDecomposition {
    /// Swap branch labels so that |ψ₊⟩ has the larger overlap with `reference`.
    pub fn relabel_by_reference(&mut self, reference: &Spinor) {
        let a = inner(reference, &self.states[0]).norm();
        let b = inner(reference, &self.states[1]).norm();
        if b > a {
            self.swap();
        }
    }

    pub fn swap(&mut self) {
        self.states.swap(0, 1);
        self.total_phases.swap(0, 1);
        self.quasienergies.swap(0, 1);
    }
}

/// Unit eigenvector of n̂·σ with eigenvalue +1 (numerically stable on the
/// whole sphere).
fn plus_eigenvector(n: [f64; 3]) -> Spinor {
    let [x, y, z] = n;
    if z >= 0.0 {
        let s = (2.0 * (1.0 + z)).sqrt();
        [Complex64::new((1.0 + z) / s, 0.0), Complex64::new(x / s, y / s)]
    } else {
        let s = (2.0 * (1.0 - z)).sqrt();
        [Complex64::new(x / s, -y / s), Complex64::new((1.0 - z) / s, 0.0)]
    }
}

/// Cyclic initial states and total phases from U(T).
///
/// Writing U(T) = aI + i m·σ, the eigenvalues are a ± i|m| with eigenvectors
/// of m̂·σ. The + branch is the one with θ ∈ [0, π]; its partner is built as
/// (−b*, a*) so the pair is orthonormal to rounding.
pub fn cyclic_decomposition(ut: &ComplexMat2, p: &ModelParams) -> CyclicDecomposition {
    let (c0, c) = ut.pauli_components();
    // K = (U − U†)/2i = m·σ
    let m = [c[0].im, c[1].im, c[2].im];
    let mn = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
    let a = c0.re;
    let period = p.period();
    let degenerate = 2.0 * mn < DEGENERACY_TOL;
    let (states, theta) = if degenerate {
        let th = wrap_pi(mn.atan2(a));
        (
            [
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ],
            [th, th],
        )
    } else {
        let v = plus_eigenvector([m[0] / mn, m[1] / mn, m[2] / mn]);
        let w = [-v[1].conj(), v[0].conj()];
        let th = mn.atan2(a);
        ([v, w], [th, wrap_pi(-th)])
    };
    let quasienergies = [
        fold_quasienergy(-theta[0] / period, p.omega),
        fold_quasienergy(-theta[1] / period, p.omega),
    ];
    CyclicDecomposition { states, total_phases: theta, quasienergies, degenerate }
}

/// Per-branch phases and uncertainty of the two cyclic states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricResult {
    pub cyclic_states: [Spinor; 2],
    /// θ± ∈ (−π, π].
    pub total_phases: [f64; 2],
    /// α± = −∫⟨ψ±|H|ψ±⟩dt.
    pub dynamical_phases: [f64; 2],
    /// γ± ∈ [0, 2π), with γ₋ reported as the complement of γ₊.
    pub aa_phases: [f64; 2],
    /// γ± as computed independently for each branch, before the complement
    /// convention is applied (used to check complementarity).
    pub independent_aa_phases: [f64; 2],
    pub quasienergies: [f64; 2],
    /// s = 2∫ΔE dt for the + branch.
    pub uncertainty: f64,
    /// s for both branches.
    pub uncertainties: [f64; 2],
    pub degenerate_flag: bool,
}

impl GeometricResult {
    /// Fail when the cyclic states are degenerate and phases are
    /// convention-dependent.
    pub fn require_nondegenerate(&self) -> Result<&Self> {
        if self.degenerate_flag {
            Err(Error::DegenerateCyclicStates)
        } else {
            Ok(self)
        }
    }

    /// |⟨ψ₊|ψ₋⟩|.
    pub fn orthogonality_defect(&self) -> f64 {
        inner(&self.cyclic_states[0], &self.cyclic_states[1]).norm()
    }

    /// Distance of (θ₊ + θ₋) from the nearest multiple of 2π.
    pub fn total_phase_complementarity(&self) -> f64 {
        wrap_pi(self.total_phases[0] + self.total_phases[1]).abs()
    }

    /// Distance of the independently computed γ₊ + γ₋ from a multiple of 2π.
    pub fn aa_phase_complementarity(&self) -> f64 {
        wrap_pi(self.independent_aa_phases[0] + self.independent_aa_phases[1]).abs()
    }
}

fn evolved_bloch_vectors(r: &PropagationResult, state: &Spinor) -> Vec<[f64; 3]> {
    r.unitaries.iter().map(|u| bloch_vector(&u.apply(state))).collect()
}

/// α = −∫₀ᵀ⟨ψ(t)|H(t)|ψ(t)⟩dt on the stored grid.
pub fn dynamical_phase(r: &PropagationResult, state: &Spinor, p: &ModelParams) -> f64 {
    let energies: Vec<f64> = r
        .grid
        .iter()
        .zip(evolved_bloch_vectors(r, state))
        .map(|(&t, rv)| {
            let b = p.field_at(t);
            b[0] * rv[0] + b[1] * rv[1] + b[2] * rv[2]
        })
        .collect();
    -simpson(&energies, r.spacing())
}

/// s = 2∫₀ᵀ ΔE dt with ΔE² = ⟨H²⟩ − ⟨H⟩² clamped at zero.
pub fn time_energy_uncertainty(r: &PropagationResult, state: &Spinor, p: &ModelParams) -> f64 {
    let spread: Vec<f64> = r
        .grid
        .iter()
        .zip(evolved_bloch_vectors(r, state))
        .map(|(&t, rv)| {
            let b = p.field_at(t);
            let mean = b[0] * rv[0] + b[1] * rv[1] + b[2] * rv[2];
            let second = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
            (second - mean * mean).max(0.0).sqrt()
        })
        .collect();
    2.0 * simpson(&spread, r.spacing())
}

/// Phases, quasienergies and uncertainty using the default branch labels.
pub fn aa_phases(r: &PropagationResult, p: &ModelParams) -> GeometricResult {
    let dec = cyclic_decomposition(&r.final_unitary(), p);
    geometric_result(r, p, &dec)
}

/// As [`aa_phases`], with the + branch chosen by overlap with `reference`.
pub fn aa_phases_with_reference(r: &PropagationResult, p: &ModelParams, reference: &Spinor) -> GeometricResult {
    let mut dec = cyclic_decomposition(&r.final_unitary(), p);
    dec.relabel_by_reference(reference);
    geometric_result(r, p, &dec)
}

/// Assemble a [`GeometricResult`] for a given (possibly relabeled) decomposition.
pub fn geometric_result(r: &PropagationResult, p: &ModelParams, dec: &CyclicDecomposition) -> GeometricResult {
    let alpha = [
        dynamical_phase(r, &dec.states[0], p),
        dynamical_phase(r, &dec.states[1], p),
    ];
    let s = [
        time_energy_uncertainty(r, &dec.states[0], p),
        time_energy_uncertainty(r, &dec.states[1], p),
    ];
    let independent = [
        wrap_2pi(dec.total_phases[0] - alpha[0]),
        wrap_2pi(dec.total_phases[1] - alpha[1]),
    ];
    let gp = independent[0];
    let gm = wrap_2pi(2.0 * std::f64::consts::PI - gp);
    GeometricResult {
        cyclic_states: dec.states,
        total_phases: dec.total_phases,
        dynamical_phases: alpha,
        aa_phases: [gp, gm],
        independent_aa_phases: independent,
        quasienergies: dec.quasienergies,
        uncertainty: s[0],
        uncertainties: s,
        degenerate_flag: dec.degenerate,
    }
}

/// P_up(t) = |⟨↑|U(t)|ψ⟩|² on the stored grid.
pub fn population_up(r: &PropagationResult, state: &Spinor) -> Vec<(f64, f64)> {
    r.grid
        .iter()
        .zip(&r.unitaries)
        .map(|(&t, u)| (t, u.apply(state)[0].norm_sqr().clamp(0.0, 1.0)))
        .collect()
}

/// Bloch-sphere trajectory of U(t)|ψ⟩ with its Fubini–Study length.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochTrajectory {
    pub times: Vec<f64>,
    pub points: Vec<[f64; 3]>,
    /// Accumulated great-circle length up to each grid point.
    pub cumulative_length: Vec<f64>,
    /// Total length, Richardson-extrapolated from the full and the
    /// every-other-point polygon to remove the O(h²) chord defect.
    pub path_length: f64,
}

impl BlochTrajectory {
    pub fn from_points(times: Vec<f64>, points: Vec<[f64; 3]>) -> Self {
        let mut cumulative = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in points.windows(2) {
            acc += arc(&w[0], &w[1]);
            cumulative.push(acc);
        }
        let n = points.len().saturating_sub(1);
        let path_length = if n >= 2 && n % 2 == 0 {
            let coarse: f64 = points.iter().step_by(2).collect::<Vec<_>>().windows(2).map(|w| arc(w[0], w[1])).sum();
            (4.0 * acc - coarse) / 3.0
        } else {
            acc
        };
        Self { times, points, cumulative_length: cumulative, path_length }
    }

    /// Euclidean distance between the first and last Bloch points.
    pub fn endpoint_distance(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt(),
            _ => 0.0,
        }
    }
}

/// Great-circle angle between two unit vectors.
fn arc(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let cx = a[1] * b[2] - a[2] * b[1];
    let cy = a[2] * b[0] - a[0] * b[2];
    let cz = a[0] * b[1] - a[1] * b[0];
    let cross = (cx * cx + cy * cy + cz * cz).sqrt();
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    cross.atan2(dot)
}

pub fn bloch_trajectory(r: &PropagationResult, state: &Spinor) -> BlochTrajectory {
    BlochTrajectory::from_points(r.grid.clone(), evolved_bloch_vectors(r, state))
}
