//! Counter-rotating-hybridized rotating-wave (CHRW) analytic method.
//!
//! The unitary e^{S(t)} with S = −i(A/2ω)sin ωt (ξσz + ζσx) followed by the
//! real rotation D = uσz − vσx maps the lab Hamiltonian onto
//! H̃ = (Ξ̃/2)τz + (Ã/2)(τ₊e^{−iωt} + τ₋e^{iωt}) plus neglected higher
//! harmonics, provided (ξ, ζ) solve two self-consistency conditions.

use num_complex::Complex64;

use crate::bessel::{bessel_j, j0, j1, j1_over_z, j2, jc_over_z2, one_minus_j0_over_z2};
use crate::error::{Error, Result};
use crate::mat2::{normalize, real_spinor, ComplexMat2, Spinor};
use crate::model::{hamiltonian_at, wrap_2pi, ModelParams, NumericPolicy};

/// Amplitude (in units of ω) above which the truncation to the first
/// harmonic is no longer trusted.
pub const VALIDITY_CEILING: f64 = 2.0;

/// Self-consistent (ξ, ζ) and all derived renormalized quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChrwSolution {
    pub params: ModelParams,
    pub xi: f64,
    pub zeta: f64,
    /// x = √(ξ² + ζ²).
    pub x: f64,
    /// z = (A/ω)x, the Bessel argument.
    pub z: f64,
    pub j0: f64,
    pub j1: f64,
    pub j2: f64,
    /// Renormalized bias ε̃.
    pub eps_t: f64,
    /// Renormalized tunneling Δ̃.
    pub delta_t: f64,
    /// j_c = (1 − J₀ − J₂)/x².
    pub jc: f64,
    /// Renormalized splitting Ξ̃ = √(Δ̃² + ε̃²).
    pub xi_t: f64,
    pub u: f64,
    pub v: f64,
    /// Renormalized drive Ã = 2J₁(z)(Δξ − εζ)/x.
    pub a_t: f64,
    /// Detuning δ̃ = Ξ̃ − ω.
    pub delta_det: f64,
    /// Modulated Rabi frequency Ω̃ = √(δ̃² + Ã²).
    pub omega_t: f64,
    /// The two self-consistency left-hand sides at the solution.
    pub residuals: [f64; 2],
    /// Number of amplitude-continuation stages used.
    pub continuation_steps: usize,
    /// A/ω at or above [`VALIDITY_CEILING`].
    pub above_validity_ceiling: bool,
}

/// Quantities that depend only on (ξ, ζ) for fixed parameters.
#[derive(Debug, Clone, Copy)]
struct Derived {
    x: f64,
    z: f64,
    g: f64,
    eps_t: f64,
    delta_t: f64,
    jc: f64,
    xi_t: f64,
}

fn derived(p: &ModelParams, xi: f64, zeta: f64) -> Derived {
    let x = xi.hypot(zeta);
    let a_w = p.amplitude / p.omega;
    let z = a_w * x;
    let g = p.delta * xi - p.epsilon * zeta;
    // (1 − J₀)/x² = (A/ω)²(1 − J₀(z))/z², regular as A → 0
    let f0 = a_w * a_w * one_minus_j0_over_z2(z);
    let jc = a_w * a_w * jc_over_z2(z);
    let eps_t = p.epsilon + zeta * f0 * g;
    let delta_t = p.delta - xi * f0 * g;
    Derived { x, z, g, eps_t, delta_t, jc, xi_t: delta_t.hypot(eps_t) }
}

/// Residuals with the first condition divided by A, so that the system stays
/// well-posed in the A → 0 limit used to start the continuation.
fn scaled_residuals(p: &ModelParams, xi: f64, zeta: f64) -> [f64; 2] {
    let d = derived(p, xi, zeta);
    let c1 = 1.0 - xi - zeta * zeta * d.jc;
    let c2 = zeta * (1.0 - xi * d.jc);
    let r1 = 0.5 * (d.delta_t / d.xi_t * c1 + d.eps_t / d.xi_t * c2) - d.g / p.omega * j1_over_z(d.z);
    let r2 = d.eps_t * c1 - d.delta_t * c2;
    [r1, r2]
}

/// The two self-consistency conditions exactly as they stand (not rescaled).
pub fn self_consistency_residuals(p: &ModelParams, xi: f64, zeta: f64) -> [f64; 2] {
    let s = scaled_residuals(p, xi, zeta);
    [p.amplitude * s[0], s[1]]
}

/// Closed-form solution of the conditions at A = 0.
pub fn zero_amplitude_solution(p: &ModelParams) -> (f64, f64) {
    let xi0 = p.static_splitting();
    if xi0 == 0.0 {
        return (1.0, 0.0);
    }
    let w = p.omega;
    ((w + p.epsilon * p.epsilon / xi0) / (w + xi0), p.epsilon * p.delta / (xi0 * (w + xi0)))
}

fn newton(p: &ModelParams, mut v: [f64; 2], tol: f64) -> Option<[f64; 2]> {
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut r = scaled_residuals(p, v[0], v[1]);
    for _ in 0..100 {
        if !norm(r).is_finite() {
            return None;
        }
        if norm(r) <= tol {
            return Some(v);
        }
        // central-difference Jacobian
        let mut jac = [[0.0; 2]; 2];
        for (col, _) in v.iter().enumerate() {
            let h = 1e-7 * v[col].abs().max(1e-3);
            let mut vp = v;
            let mut vm = v;
            vp[col] += h;
            vm[col] -= h;
            let rp = scaled_residuals(p, vp[0], vp[1]);
            let rm = scaled_residuals(p, vm[0], vm[1]);
            jac[0][col] = (rp[0] - rm[0]) / (2.0 * h);
            jac[1][col] = (rp[1] - rm[1]) / (2.0 * h);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = [
            -(jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
        ];
        let mut lambda = 1.0;
        loop {
            let cand = [v[0] + lambda * dx[0], v[1] + lambda * dx[1]];
            let rc = scaled_residuals(p, cand[0], cand[1]);
            if norm(rc) < norm(r) || lambda < 1e-4 {
                let step = (lambda * dx[0]).abs().max((lambda * dx[1]).abs());
                v = cand;
                r = rc;
                if step <= 1e-16 * (1.0 + v[0].abs()) {
                    return if norm(r) <= 1e3 * tol { Some(v) } else { None };
                }
                break;
            }
            lambda *= 0.5;
        }
    }
    (norm(r) <= 1e3 * tol).then_some(v)
}

/// Solve the self-consistency conditions by damped Newton iteration with
/// amplitude continuation from the A = 0 closed form.
pub fn solve_self_consistent(p: &ModelParams, policy: &NumericPolicy) -> Result<ChrwSolution> {
    p.validate()?;
    policy.validate()?;
    if p.static_splitting() == 0.0 {
        return Err(Error::DomainError("CHRW transform undefined for Δ = ε = 0".into()));
    }
    let inner_tol = (policy.root_tol * 1e-3).max(1e-16);
    let a_w = p.amplitude / p.omega;
    let stages = ((a_w / 0.25).ceil() as usize).max(1);
    let mut v = {
        let (a, b) = zero_amplitude_solution(p);
        [a, b]
    };
    for k in 1..=stages {
        let stage = p.with_amplitude(p.amplitude * k as f64 / stages as f64);
        v = match newton(&stage, v, inner_tol) {
            Some(next) => next,
            None => {
                let r = self_consistency_residuals(&stage, v[0], v[1]);
                return Err(Error::NoConvergence { residuals: r });
            }
        };
    }
    let residuals = self_consistency_residuals(p, v[0], v[1]);
    if residuals.iter().any(|r| !(r.abs() <= policy.root_tol)) {
        return Err(Error::NoConvergence { residuals });
    }
    let mut sol = ChrwSolution::from_parameters(p, v[0], v[1]);
    sol.continuation_steps = stages;
    Ok(sol)
}

fn sinc_half(omega: f64, t: f64) -> f64 {
    // sin(Ωt/2)/Ω, finite as Ω → 0
    let a = 0.5 * omega * t;
    if a.abs() < 1e-8 {
        0.5 * t
    } else {
        a.sin() / omega
    }
}

impl ChrwSolution {
    /// Assemble all derived quantities for given (ξ, ζ) without solving.
    pub fn from_parameters(p: &ModelParams, xi: f64, zeta: f64) -> Self {
        let d = derived(p, xi, zeta);
        let (u, v) = if d.xi_t > 0.0 {
            let r = d.eps_t / d.xi_t;
            let sign = if d.delta_t < 0.0 { -1.0 } else { 1.0 };
            ((0.5 - 0.5 * r).max(0.0).sqrt(), sign * (0.5 + 0.5 * r).max(0.0).sqrt())
        } else {
            (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2)
        };
        let a_t = 2.0 * (p.amplitude / p.omega) * j1_over_z(d.z) * d.g;
        let delta_det = d.xi_t - p.omega;
        Self {
            params: *p,
            xi,
            zeta,
            x: d.x,
            z: d.z,
            j0: j0(d.z),
            j1: j1(d.z),
            j2: j2(d.z),
            eps_t: d.eps_t,
            delta_t: d.delta_t,
            jc: d.jc,
            xi_t: d.xi_t,
            u,
            v,
            a_t,
            delta_det,
            omega_t: delta_det.hypot(a_t),
            residuals: self_consistency_residuals(p, xi, zeta),
            continuation_steps: 0,
            above_validity_ceiling: p.amplitude / p.omega >= VALIDITY_CEILING,
        }
    }

    /// D = uσz − vσx (real, symmetric, D² = I).
    pub fn diagonalizer(&self) -> ComplexMat2 {
        ComplexMat2::from_pauli(0.0, [-self.v, 0.0, self.u])
    }

    /// e^{S(t)} = exp(−i(A/2ω) sin ωt (ξσz + ζσx)).
    pub fn frame_transform(&self, t: f64) -> ComplexMat2 {
        let p = &self.params;
        let phi = 0.5 * p.amplitude / p.omega * (p.omega * t).sin();
        ComplexMat2::su2_exp([phi * self.zeta, 0.0, phi * self.xi])
    }

    /// Ũ(t), the propagator of the RWA-form Hamiltonian H̃ in the τ basis.
    pub fn analytic_propagator(&self, t: f64) -> ComplexMat2 {
        let w = self.params.omega;
        let c = (0.5 * self.omega_t * t).cos();
        let s = sinc_half(self.omega_t, t);
        let em = Complex64::from_polar(1.0, -0.5 * w * t);
        let ep = Complex64::from_polar(1.0, 0.5 * w * t);
        let i = Complex64::i();
        ComplexMat2::new(
            em * (c - i * self.delta_det * s),
            -em * i * self.a_t * s,
            -ep * i * self.a_t * s,
            ep * (c + i * self.delta_det * s),
        )
    }

    /// H̃(t) = (Ξ̃/2)τz + (Ã/2)(τ₊e^{−iωt} + τ₋e^{iωt}).
    pub fn rwa_hamiltonian(&self, t: f64) -> ComplexMat2 {
        let wt = self.params.omega * t;
        ComplexMat2::from_pauli(0.0, [0.5 * self.a_t * wt.cos(), 0.5 * self.a_t * wt.sin(), 0.5 * self.xi_t])
    }

    /// Approximate lab-frame propagator e^{−S(t)} D Ũ(t) D.
    pub fn lab_propagator(&self, t: f64) -> ComplexMat2 {
        let d = self.diagonalizer();
        self.frame_transform(t).adjoint() * d * self.analytic_propagator(t) * d
    }

    /// Cyclic states of Ũ(T) in the τ basis, + branch first.
    pub fn cyclic_states_rotated(&self) -> [Spinor; 2] {
        // + state ∝ (Ω̃ − δ̃, −Ã) ∝ (Ã, −(Ω̃ + δ̃)); pick the better-conditioned form
        let (o, d, a) = (self.omega_t, self.delta_det, self.a_t);
        let plus = if d <= 0.0 {
            normalize(real_spinor(o - d, -a))
        } else {
            normalize(real_spinor(a, -(o + d)))
        };
        let plus = if plus[0].re == 0.0 && plus[1].re == 0.0 { real_spinor(1.0, 0.0) } else { plus };
        let minus = [-plus[1].conj(), plus[0].conj()];
        [plus, minus]
    }

    /// Cyclic states mapped back to the lab frame at t = 0: D|ψ̃±⟩.
    pub fn cyclic_states_lab(&self) -> [Spinor; 2] {
        let d = self.diagonalizer();
        let [a, b] = self.cyclic_states_rotated();
        [d.apply(&a), d.apply(&b)]
    }

    /// θ±, α±, γ± of the CHRW route.
    pub fn phases(&self) -> ChrwPhases {
        let t = self.params.period();
        let theta = 0.5 * (self.omega_t - self.params.omega) * t;
        let alpha = self.dynamical_phase_plus();
        let gamma = theta - alpha;
        ChrwPhases {
            total: [theta, -theta],
            dynamical: [alpha, -alpha],
            aa: [gamma, -gamma],
            aa_wrapped: [wrap_2pi(gamma), wrap_2pi(-gamma)],
        }
    }

    /// Closed-form dynamical phase α₊ of the CHRW cyclic state.
    pub fn dynamical_phase_plus(&self) -> f64 {
        let p = &self.params;
        let (e, dl, a) = (p.epsilon, p.delta, p.amplitude);
        let (xi, ze, x) = (self.xi, self.zeta, self.x);
        let x2 = x * x;
        let (et, dt, xt) = (self.eps_t, self.delta_t, self.xi_t);
        let (de, at, om) = (self.delta_det, self.a_t, self.omega_t);
        let (j0, j1) = (self.j0, self.j1);
        let j1z = j1_over_z(self.z);
        let b1 = e
            * (et / xt * de * (1.0 + j0) + 2.0 * xi * ze / x2 * dt / xt * de * (1.0 - j0)
                - 2.0 * ze / x * at * j1
                + (xi * xi - ze * ze) / x2 * et / xt * de * (1.0 - j0));
        let b2 = a
            * at
            * (xi * xi / x2 * dt / xt + xi * ze / x2 * et / xt * (2.0 * j1z - 1.0) + 2.0 * ze * ze / x2 * dt / xt * j1z);
        let b3 = 2.0
            * dl
            * (ze * ze / x2 * dt / xt * de
                + xi * xi / x2 * dt / xt * j0 * de
                + xi * ze / x2 * et / xt * de * (1.0 - j0)
                + xi / x * at * j1);
        p.period() / (4.0 * om) * (b1 + b2 + b3)
    }

    /// γ₊ from the simplified unbiased-case expression
    /// ±[(Ω̃ − ω)/2 − (Δ̃δ̃ + (A + Ã)Ã/2)/(2Ω̃)]T.
    pub fn symmetric_aa_phase(&self) -> f64 {
        let p = &self.params;
        let bracket = 0.5 * (self.omega_t - p.omega)
            - (self.delta_t * self.delta_det + 0.5 * (p.amplitude + self.a_t) * self.a_t) / (2.0 * self.omega_t);
        bracket * p.period()
    }

    /// H′(t) = e^{S}He^{−S} − i e^{S}∂ₜe^{−S}, evaluated without truncation.
    pub fn transformed_hamiltonian(&self, t: f64) -> ComplexMat2 {
        let p = &self.params;
        let es = self.frame_transform(t);
        let drive = 0.5 * p.amplitude * (p.omega * t).cos();
        es * hamiltonian_at(t, p) * es.adjoint()
            + ComplexMat2::from_pauli(0.0, [drive * self.zeta, 0.0, drive * self.xi])
    }

    /// Zero-harmonic part H₀′ = −(Δ̃/2)σx − (ε̃/2)σz.
    pub fn static_part(&self) -> ComplexMat2 {
        ComplexMat2::from_pauli(0.0, [-0.5 * self.delta_t, 0.0, -0.5 * self.eps_t])
    }

    /// Single-harmonic part H₁′(t).
    pub fn first_harmonic(&self, t: f64) -> ComplexMat2 {
        let p = &self.params;
        let wt = p.omega * t;
        let g = p.delta * self.xi - p.epsilon * self.zeta;
        let a2 = 0.5 * p.amplitude * wt.cos();
        ComplexMat2::from_pauli(
            0.0,
            [
                a2 * self.zeta * (1.0 - self.xi * self.jc),
                -g / self.x * self.j1 * wt.sin(),
                -a2 * (1.0 - self.xi - self.zeta * self.zeta * self.jc),
            ],
        )
    }

    /// Double-harmonic part H₂′(t).
    pub fn second_harmonic(&self, t: f64) -> ComplexMat2 {
        let p = &self.params;
        let wt = p.omega * t;
        let g = p.delta * self.xi - p.epsilon * self.zeta;
        let y = 0.5 * p.amplitude * self.zeta / self.x * self.j1 * (2.0 * wt).sin();
        let c = -g / (self.x * self.x) * self.j2 * (2.0 * wt).cos();
        ComplexMat2::from_pauli(0.0, [c * self.xi, y, -c * self.zeta])
    }

    /// Remainder V(t) = H′ − H₀′ − H₁′ − H₂′ (harmonics ≥ 3), exact.
    pub fn harmonic_remainder(&self, t: f64) -> ComplexMat2 {
        self.transformed_hamiltonian(t) - self.static_part() - self.first_harmonic(t) - self.second_harmonic(t)
    }

    /// V(t) from its Bessel-series form truncated after `terms` harmonic pairs.
    pub fn harmonic_remainder_series(&self, t: f64, terms: usize) -> ComplexMat2 {
        let p = &self.params;
        let wt = p.omega * t;
        let x2 = self.x * self.x;
        let g_t = p.delta * self.xi - p.bias_at(t) * self.zeta;
        let mut sum_y = 0.0;
        let mut sum_c = 0.0;
        for n in 2..(2 + terms) {
            let odd = (2 * n - 1) as i32;
            let even = (2 * n) as i32;
            sum_y += self.x * bessel_j(odd, self.z) * (odd as f64 * wt).sin();
            sum_c += bessel_j(even, self.z) * (even as f64 * wt).cos();
        }
        // coefficient of (ξσx − ζσz)
        let c = 0.5 * p.amplitude * self.zeta / x2 * self.j2 * (3.0 * wt).cos() - g_t / x2 * sum_c;
        ComplexMat2::from_pauli(0.0, [c * self.xi, -g_t / x2 * sum_y, -c * self.zeta])
    }

    /// Norm ‖V(t)‖ of the neglected remainder (Frobenius).
    pub fn remainder_norm(&self, t: f64) -> f64 {
        self.harmonic_remainder(t).norm()
    }
}

/// Phases of the CHRW cyclic states; `aa` is θ − α without wrapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChrwPhases {
    pub total: [f64; 2],
    pub dynamical: [f64; 2],
    pub aa: [f64; 2],
    pub aa_wrapped: [f64; 2],
}

/// Convention for the second-order Rabi-frequency expression, whose
/// printed right-hand side has the dimension of a squared frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RabiConvention {
    /// Treat the expression as Ω̃² and take the square root (default).
    #[default]
    Squared,
    /// Use the expression as printed.
    Literal,
}

/// Second-order-in-A estimate of Ω̃:
/// (ω − Ξ₀)² + A²Δ²/(2Ξ₀(ω + Ξ₀)), interpreted per `convention`.
pub fn rabi_frequency_2nd_order(p: &ModelParams, convention: RabiConvention) -> Result<f64> {
    let xi0 = p.static_splitting();
    if xi0 == 0.0 {
        return Err(Error::DomainError("Ξ₀ = 0".into()));
    }
    let w = p.omega;
    let rhs = (w - xi0).powi(2) + p.amplitude.powi(2) * p.delta.powi(2) / (2.0 * xi0 * (w + xi0));
    Ok(match convention {
        RabiConvention::Squared => rhs.sqrt(),
        RabiConvention::Literal => rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(d: f64, e: f64, a: f64) -> ChrwSolution {
        solve_self_consistent(&ModelParams::unit(d, e, a).unwrap(), &NumericPolicy::default()).unwrap()
    }

    #[test]
    fn residuals_and_identities() {
        let s = solve(1.0, 0.5, 1.0);
        assert!(s.residuals.iter().all(|r| r.abs() <= 1e-12));
        assert!((s.u * s.u + s.v * s.v - 1.0).abs() < 1e-14);
        assert!((s.xi_t.powi(2) - s.delta_t.powi(2) - s.eps_t.powi(2)).abs() < 1e-13);
        assert!((s.omega_t.powi(2) - s.delta_det.powi(2) - s.a_t.powi(2)).abs() < 1e-13);
        assert!(s.omega_t.is_finite() && s.omega_t > 0.0);
        let direct = 2.0 * s.j1 * (s.params.delta * s.xi - s.params.epsilon * s.zeta) / s.x;
        assert!((direct - s.a_t).abs() < 1e-14);
    }

    #[test]
    fn unbiased_case_has_zero_zeta() {
        for d in [0.3, 1.0, 2.5, 4.0] {
            let s = solve(d, 0.0, 1.0);
            assert!(s.zeta.abs() <= 1e-12);
            let g = s.phases().aa[0];
            assert!((g - s.symmetric_aa_phase()).abs() <= 1e-10);
        }
    }

    #[test]
    fn small_amplitude_limit() {
        let s = solve(1.0, 0.0, 1e-4);
        assert!((s.xi - 0.5).abs() / 0.5 < 1e-6);
        let s = solve(2.0, 0.0, 1e-4);
        assert!((s.xi - 1.0 / 3.0).abs() * 3.0 < 1e-6);
    }

    #[test]
    fn zero_amplitude_closed_form_solves_conditions() {
        let p = ModelParams::unit(1.3, 0.7, 0.0).unwrap();
        let (xi, ze) = zero_amplitude_solution(&p);
        let r = scaled_residuals(&p, xi, ze);
        assert!(r[0].abs() < 1e-15 && r[1].abs() < 1e-15);
    }

    #[test]
    fn propagator_solves_rwa_equation() {
        // oracle: finite-difference check of i dŨ/dt = H̃Ũ
        let s = solve(1.4, 0.6, 1.2);
        for &t in &[0.3, 1.7, 4.9] {
            let h = 1e-5;
            let du = (s.analytic_propagator(t + h) - s.analytic_propagator(t - h))
                .scale(Complex64::new(0.0, 1.0 / (2.0 * h)));
            let rhs = s.rwa_hamiltonian(t) * s.analytic_propagator(t);
            assert!((du - rhs).max_abs() < 1e-9);
        }
        assert_eq!(s.analytic_propagator(0.0), ComplexMat2::identity());
        let u = s.analytic_propagator(s.params.period());
        assert!(u.unitarity_defect() < 1e-14);
    }

    #[test]
    fn period_propagator_closed_form() {
        let s = solve(2.0, 0.5, 1.0);
        let t = s.params.period();
        let x = 0.5 * s.omega_t * t;
        let i = Complex64::i();
        let expect = ComplexMat2::identity().scale(Complex64::new(-x.cos(), 0.0))
            + ComplexMat2::from_pauli(0.0, [s.a_t / s.omega_t * x.sin(), 0.0, s.delta_det / s.omega_t * x.sin()])
                .scale(i);
        assert!((s.analytic_propagator(t) - expect).max_abs() < 1e-13);
    }

    #[test]
    fn diagonalizer_diagonalizes_static_part() {
        for (d, e) in [(1.0, 0.5), (2.7, 1.5), (0.4, 0.9)] {
            let s = solve(d, e, 1.0);
            let m = s.diagonalizer() * s.static_part() * s.diagonalizer();
            assert!(m.0[0][1].norm() < 1e-14);
            assert!((m.0[0][0].re - 0.5 * s.xi_t).abs() < 1e-14);
        }
    }

    #[test]
    fn rotated_first_harmonic_takes_rwa_form() {
        let s = solve(1.8, 0.7, 1.3);
        let d = s.diagonalizer();
        for &t in &[0.2, 1.1, 3.3] {
            let m = d * (s.static_part() + s.first_harmonic(t)) * d;
            assert!((m - s.rwa_hamiltonian(t)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_expansion_matches_exact_transform() {
        let s = solve(1.5, 0.8, 1.7);
        for &t in &[0.0, 0.4, 2.2, 5.0] {
            let series = s.harmonic_remainder_series(t, 12);
            assert!((s.harmonic_remainder(t) - series).max_abs() < 1e-13);
        }
        assert!(s.remainder_norm(0.9) < 0.1);
    }

    #[test]
    fn dynamical_phase_matches_quadrature() {
        // oracle: −∫⟨ψ̃|Ũ†D e^S H e^{−S} D Ũ|ψ̃⟩ by Simpson quadrature
        for (d, e) in [(2.0, 0.5), (1.0, 0.5), (0.5, 0.3)] {
            let s = solve(d, e, 1.0);
            let psi = s.cyclic_states_rotated()[0];
            let dm = s.diagonalizer();
            let alpha = -crate::quadrature::simpson_fn(
                |t| {
                    let es = s.frame_transform(t);
                    let m = dm * es * hamiltonian_at(t, &s.params) * es.adjoint() * dm;
                    let phi = s.analytic_propagator(t).apply(&psi);
                    crate::mat2::inner(&phi, &m.apply(&phi)).re
                },
                0.0,
                s.params.period(),
                4000,
            );
            assert!((alpha - s.dynamical_phase_plus()).abs() < 1e-10, "{d} {e}");
        }
    }

    #[test]
    fn cyclic_states_are_eigenvectors() {
        let s = solve(2.3, 0.4, 1.0);
        let ut = s.analytic_propagator(s.params.period());
        let ph = s.phases();
        for (k, psi) in s.cyclic_states_rotated().iter().enumerate() {
            let out = ut.apply(psi);
            let e = Complex64::from_polar(1.0, ph.total[k]);
            assert!((out[0] - e * psi[0]).norm() < 1e-12 && (out[1] - e * psi[1]).norm() < 1e-12);
        }
    }

    #[test]
    fn second_order_rabi_frequency() {
        let p = ModelParams::unit(1.2, 0.3, 0.0).unwrap();
        let xi0 = p.static_splitting();
        assert!((rabi_frequency_2nd_order(&p, RabiConvention::Literal).unwrap() - (1.0 - xi0).powi(2)).abs() < 1e-15);
        assert!(rabi_frequency_2nd_order(&ModelParams::unit(0.0, 0.0, 1.0).unwrap(), RabiConvention::Squared).is_err());
    }

    #[test]
    fn rejects_fully_degenerate_point() {
        let p = ModelParams::unit(0.0, 0.0, 1.0).unwrap();
        assert!(solve_self_consistent(&p, &NumericPolicy::default()).is_err());
    }
}
