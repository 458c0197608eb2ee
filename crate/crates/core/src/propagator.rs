//! Exact time evolution over one driving period.
//!
//! Each substep applies the fourth-order Magnus exponential built from two
//! Gauss–Legendre samples of the field; for a traceless 2×2 generator this is
//! an exact SU(2) element, so unitarity is preserved by construction. The
//! substep length is controlled by step doubling and results are stored on a
//! uniform grid for the downstream quadratures.

use crate::error::{Error, Result};
use crate::mat2::ComplexMat2;
use crate::model::{ModelParams, NumericPolicy};

const SQRT3_6: f64 = 0.288_675_134_594_812_9; // √3/6
const MAX_SUBSTEPS_PER_INTERVAL: usize = 1 << 16;

/// Sampled propagator U(t_k) on a uniform grid covering [t0, t1].
#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub params: ModelParams,
    pub grid: Vec<f64>,
    pub unitaries: Vec<ComplexMat2>,
    pub max_unitarity_defect: f64,
    pub su2_defect: f64,
}

impl PropagationResult {
    /// U at the final grid point (U(T) for a one-period propagation).
    pub fn final_unitary(&self) -> ComplexMat2 {
        *self.unitaries.last().expect("non-empty grid")
    }

    /// Uniform grid spacing.
    pub fn spacing(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// U(t_k + nT) = U(t_k)·U(T)ⁿ for a one-period result.
    pub fn unitary_after_periods(&self, k: usize, n: usize) -> ComplexMat2 {
        let ut = self.final_unitary();
        let mut acc = ComplexMat2::identity();
        for _ in 0..n {
            acc = ut * acc;
        }
        self.unitaries[k] * acc
    }
}

/// One Magnus-4 step of length h starting at t.
fn magnus_step(p: &ModelParams, t: f64, h: f64) -> ComplexMat2 {
    let b1 = p.field_at(t + (0.5 - SQRT3_6) * h);
    let b2 = p.field_at(t + (0.5 + SQRT3_6) * h);
    // Ω = −i[(h/2)(b1+b2) + (√3/6)h²(b2×b1)]·σ
    let c = [
        b2[1] * b1[2] - b2[2] * b1[1],
        b2[2] * b1[0] - b2[0] * b1[2],
        b2[0] * b1[1] - b2[1] * b1[0],
    ];
    let k = SQRT3_6 * h * h;
    let g = [
        0.5 * h * (b1[0] + b2[0]) + k * c[0],
        0.5 * h * (b1[1] + b2[1]) + k * c[1],
        0.5 * h * (b1[2] + b2[2]) + k * c[2],
    ];
    ComplexMat2::su2_exp(g)
}

/// Propagate over one period [0, T].
pub fn propagate(p: &ModelParams, policy: &NumericPolicy) -> Result<PropagationResult> {
    propagate_interval(p, policy, 0.0, p.period(), policy.quad_points)
}

/// Propagate U(t; t0) over [t0, t1], stored on `intervals + 1` uniform points.
pub fn propagate_interval(
    p: &ModelParams,
    policy: &NumericPolicy,
    t0: f64,
    t1: f64,
    intervals: usize,
) -> Result<PropagationResult> {
    p.validate()?;
    policy.validate()?;
    if !(t1 > t0) || intervals == 0 {
        return Err(Error::InvalidParams("empty propagation interval".into()));
    }
    let dt = (t1 - t0) / intervals as f64;
    let grid: Vec<f64> = (0..=intervals)
        .map(|k| if k == intervals { t1 } else { t0 + dt * k as f64 })
        .collect();
    let mut unitaries = Vec::with_capacity(intervals + 1);
    let mut u = ComplexMat2::identity();
    unitaries.push(u);
    let mut max_defect: f64 = 0.0;
    let mut su2: f64 = 0.0;
    let mut h = dt;
    for k in 0..intervals {
        let (ta, tb) = (grid[k], grid[k + 1]);
        let mut t = ta;
        let mut substeps = 0usize;
        while t < tb {
            // Snap to the interval end instead of leaving a rounding sliver.
            let last = tb - t <= h * (1.0 + 1e-9);
            let step = if last { tb - t } else { h };
            let full = magnus_step(p, t, step);
            let half = magnus_step(p, t + 0.5 * step, 0.5 * step) * magnus_step(p, t, 0.5 * step);
            let err = (full - half).max_abs() / 15.0;
            substeps += 1;
            if err <= policy.step_tol {
                u = half * u;
                t = if last { tb } else { t + step };
                let grow = if err == 0.0 { 2.0 } else { (0.9 * (policy.step_tol / err).powf(0.2)).min(2.0) };
                // A step shortened to reach the interval end says nothing
                // against the previous proposal.
                h = if last { (step * grow).max(h) } else { step * grow }.min(dt);
            } else {
                h = step * (0.9 * (policy.step_tol / err).powf(0.2)).max(0.1);
            }
            if substeps > MAX_SUBSTEPS_PER_INTERVAL || h < 1e-14 * dt {
                return Err(Error::StepFailure { t, tol: policy.step_tol });
            }
        }
        u = u.unitary_projection_step();
        let defect = u.unitarity_defect();
        if defect > policy.unitarity_tol {
            return Err(Error::UnitarityLoss { defect, tol: policy.unitarity_tol });
        }
        max_defect = max_defect.max(defect);
        su2 = su2.max(u.su2_defect());
        unitaries.push(u);
    }
    Ok(PropagationResult { params: *p, grid, unitaries, max_unitarity_defect: max_defect, su2_defect: su2 })
}

/// Max over the grid of |u₁ − u₄*| + |u₂ + u₃*| + |det U − 1|.
pub fn verify_su2_structure(r: &PropagationResult) -> f64 {
    r.unitaries.iter().map(ComplexMat2::su2_defect).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn static_symmetric_closed_form() {
        let p = ModelParams::unit(1.0, 0.0, 0.0).unwrap();
        let r = propagate(&p, &NumericPolicy::default()).unwrap();
        for (t, u) in r.grid.iter().zip(&r.unitaries).step_by(97) {
            let expect = ComplexMat2::identity().scale(c((t / 2.0).cos(), 0.0))
                + ComplexMat2::sigma_x().scale(c(0.0, (t / 2.0).sin()));
            assert!((expect - *u).max_abs() < 1e-12, "t={t}");
        }
        assert!(verify_su2_structure(&r) < 1e-12);
    }

    #[test]
    fn commuting_diagonal_closed_form() {
        let p = ModelParams::unit(0.0, 0.5, 1.0).unwrap();
        let r = propagate(&p, &NumericPolicy::default()).unwrap();
        for (t, u) in r.grid.iter().zip(&r.unitaries).step_by(101) {
            let phi = 0.5 * (0.5 * t + t.sin());
            assert!((u.0[0][0] - Complex64::from_polar(1.0, phi)).norm() < 1e-12);
            assert!((u.0[1][1] - Complex64::from_polar(1.0, -phi)).norm() < 1e-12);
            assert!(u.0[0][1].norm() < 1e-14);
        }
    }

    #[test]
    fn grid_and_identity_start() {
        let p = ModelParams::unit(1.3, 0.4, 1.1).unwrap();
        let r = propagate(&p, &NumericPolicy::default()).unwrap();
        assert_eq!(r.grid.len(), 4097);
        assert_eq!(r.grid[0], 0.0);
        assert_eq!(*r.grid.last().unwrap(), p.period());
        assert_eq!(r.unitaries[0], ComplexMat2::identity());
        assert!(r.max_unitarity_defect <= 1e-10);
        assert!(r.su2_defect <= 1e-10);
    }

    #[test]
    fn composition_of_half_periods() {
        let p = ModelParams::unit(2.7993, 0.8, 1.0).unwrap();
        let pol = NumericPolicy::default();
        let t = p.period();
        let full = propagate(&p, &pol).unwrap().final_unitary();
        let a = propagate_interval(&p, &pol, 0.0, 0.5 * t, 2048).unwrap().final_unitary();
        let b = propagate_interval(&p, &pol, 0.5 * t, t, 2048).unwrap().final_unitary();
        assert!((full - b * a).max_abs() < 10.0 * pol.step_tol);
    }

    #[test]
    fn refinement_converges() {
        let p = ModelParams::unit(1.7, 0.5, 1.0).unwrap();
        let coarse = NumericPolicy { step_tol: 1e-9, ..Default::default() };
        let fine = NumericPolicy { step_tol: 0.5e-9, ..Default::default() };
        let a = propagate(&p, &coarse).unwrap().final_unitary();
        let b = propagate(&p, &fine).unwrap().final_unitary();
        assert!((a - b).max_abs() < coarse.step_tol);
    }

    #[test]
    fn matches_fine_rk4_reference() {
        // independent oracle: classical RK4 on i dU/dt = H U with a very fine step
        let p = ModelParams::unit(1.1, 0.6, 1.4).unwrap();
        let rhs = |t: f64, u: &ComplexMat2| crate::model::hamiltonian_at(t, &p).scale(c(0.0, -1.0)) * *u;
        let n = 200_000;
        let h = p.period() / n as f64;
        let mut u = ComplexMat2::identity();
        for k in 0..n {
            let t = h * k as f64;
            let hc = c(h, 0.0);
            let k1 = rhs(t, &u);
            let k2 = rhs(t + 0.5 * h, &(u + k1.scale(c(0.5 * h, 0.0))));
            let k3 = rhs(t + 0.5 * h, &(u + k2.scale(c(0.5 * h, 0.0))));
            let k4 = rhs(t + h, &(u + k3.scale(hc)));
            u = u + (k1 + k2.scale(c(2.0, 0.0)) + k3.scale(c(2.0, 0.0)) + k4).scale(c(h / 6.0, 0.0));
        }
        let r = propagate(&p, &NumericPolicy::default()).unwrap();
        assert!((r.final_unitary() - u).max_abs() < 1e-10);
    }

    #[test]
    fn period_powers() {
        let p = ModelParams::unit(0.9, 0.2, 1.0).unwrap();
        let r = propagate(&p, &NumericPolicy::default()).unwrap();
        let ut = r.final_unitary();
        assert!((r.unitary_after_periods(0, 2) - ut * ut).max_abs() < 1e-15);
    }
}
