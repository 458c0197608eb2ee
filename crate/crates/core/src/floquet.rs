//! Truncated Floquet matrices of the driven model and Fock-truncated
//! matrices of the quantum Rabi model; spectra, convergence in the
//! truncation, crossing classification and hidden-symmetry detection.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::cyclic_decomposition;
use crate::mat2::ComplexMat2;
use crate::model::{fold_quasienergy, wrap_pi, ModelParams, DEGENERACY_TOL};
use crate::optimize::golden_section_max;
use crate::propagator::PropagationResult;

/// Default tolerance on eigenvalue movement between truncations (units of ω).
pub const SPECTRUM_TOL: f64 = 1e-8;

/// Which physical model a matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    SemiclassicalFloquet,
    QuantumRabi,
}

/// Real symmetric block-tridiagonal matrix with 2×2 blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedBlockMatrix {
    pub kind: MatrixKind,
    /// N: Fourier index range [−N, N] or Fock cutoff [0, N].
    pub half_width: usize,
    pub matrix: DMatrix<f64>,
    pub params: ModelParams,
    /// Drive amplitude A (semiclassical) or coupling g (quantum).
    pub coupling: f64,
}

impl TruncatedBlockMatrix {
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// ‖M − Mᵀ‖ (max entry).
    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }
}

fn block_tridiagonal(
    p: &ModelParams,
    blocks: &[f64],
    up_coupling: impl Fn(usize) -> f64,
    down_coupling: impl Fn(usize) -> f64,
) -> DMatrix<f64> {
    let nb = blocks.len();
    let mut m = DMatrix::zeros(2 * nb, 2 * nb);
    for (j, &n) in blocks.iter().enumerate() {
        let (iu, id) = (2 * j, 2 * j + 1);
        m[(iu, iu)] = n * p.omega - 0.5 * p.epsilon;
        m[(id, id)] = n * p.omega + 0.5 * p.epsilon;
        m[(iu, id)] = -0.5 * p.delta;
        m[(id, iu)] = -0.5 * p.delta;
        if j + 1 < nb {
            let (cu, cd) = (up_coupling(j), down_coupling(j));
            m[(iu, iu + 2)] = cu;
            m[(iu + 2, iu)] = cu;
            m[(id, id + 2)] = cd;
            m[(id + 2, id)] = cd;
        }
    }
    m
}

/// Floquet matrix on |σ, −n⟩⟩ with n ∈ [−N, N]: diagonal blocks
/// [nω − ε/2, −Δ/2; −Δ/2, nω + ε/2], coupling −A/4 (↑) and +A/4 (↓).
pub fn build_semiclassical_floquet(p: &ModelParams, n: usize) -> TruncatedBlockMatrix {
    let blocks: Vec<f64> = (-(n as i64)..=n as i64).map(|k| k as f64).collect();
    let a4 = 0.25 * p.amplitude;
    TruncatedBlockMatrix {
        kind: MatrixKind::SemiclassicalFloquet,
        half_width: n,
        matrix: block_tridiagonal(p, &blocks, |_| -a4, |_| a4),
        params: *p,
        coupling: p.amplitude,
    }
}

/// Quantum Rabi matrix on |σ, n⟩ with n ∈ [0, N]: coupling ∓(g/4)√(n+1).
pub fn build_quantum_rabi(g: f64, p: &ModelParams, n: usize) -> TruncatedBlockMatrix {
    let blocks: Vec<f64> = (0..=n).map(|k| k as f64).collect();
    let g4 = 0.25 * g;
    TruncatedBlockMatrix {
        kind: MatrixKind::QuantumRabi,
        half_width: n,
        matrix: block_tridiagonal(p, &blocks, |j| -g4 * ((j + 1) as f64).sqrt(), |j| g4 * ((j + 1) as f64).sqrt()),
        params: *p,
        coupling: g,
    }
}

/// Eigenvalues of a truncation with convergence metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub kind: MatrixKind,
    /// Trusted eigenvalues, ascending: those within [−ω, ω] for the Floquet
    /// matrix, the lowest `levels` for the quantum model.
    pub eigenvalues: Vec<f64>,
    /// Two representative quasienergies in [−ω/2, ω/2) (Floquet only).
    pub folded_quasienergies: Option<[f64; 2]>,
    pub truncation_used: usize,
    /// Largest movement of the compared eigenvalues between consecutive
    /// truncations.
    pub convergence_defect: f64,
    /// Drive frequency ω, the period of the quasienergy circle.
    pub omega: f64,
}

impl SpectrumResult {
    /// Folded quasienergy gap on the circle of circumference ω.
    pub fn quasienergy_gap(&self) -> Option<f64> {
        self.folded_quasienergies.map(|[a, b]| circular_distance(a, b, self.omega))
    }

    /// Adjacent gaps of the trusted eigenvalues (quantum model).
    pub fn adjacent_gaps(&self) -> Vec<f64> {
        self.eigenvalues.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Two eigenvalues nearest zero, folded into [−ω/2, ω/2) and sorted.
pub fn folded_pair(eigenvalues: &[f64], omega: f64) -> [f64; 2] {
    let mut by_abs: Vec<f64> = eigenvalues.to_vec();
    by_abs.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let mut pair = [fold_quasienergy(by_abs[0], omega), fold_quasienergy(by_abs[1], omega)];
    pair.sort_by(f64::total_cmp);
    pair
}

fn pair_distance(a: [f64; 2], b: [f64; 2], omega: f64) -> f64 {
    let direct = circular_distance(a[0], b[0], omega).max(circular_distance(a[1], b[1], omega));
    let crossed = circular_distance(a[0], b[1], omega).max(circular_distance(a[1], b[0], omega));
    direct.min(crossed)
}

/// Semiclassical spectrum converged over the truncation schedule.
///
/// The reported truncation is the first N whose folded quasienergies move by
/// at most `tol` when N grows to the next schedule entry.
pub fn converged_floquet_spectrum(p: &ModelParams, schedule: &[usize], tol: f64) -> Result<SpectrumResult> {
    let w = p.omega;
    let mut prev: Option<(usize, Vec<f64>, [f64; 2])> = None;
    let mut last_defect = f64::INFINITY;
    for &n in schedule {
        let ev = build_semiclassical_floquet(p, n).eigenvalues();
        let pair = folded_pair(&ev, w);
        if let Some((pn, pev, ppair)) = prev.take() {
            last_defect = pair_distance(pair, ppair, w);
            if last_defect <= tol * w {
                return Ok(SpectrumResult {
                    kind: MatrixKind::SemiclassicalFloquet,
                    eigenvalues: pev.into_iter().filter(|e| e.abs() <= w).collect(),
                    folded_quasienergies: Some(ppair),
                    truncation_used: pn,
                    convergence_defect: last_defect,
                    omega: w,
                });
            }
        }
        prev = Some((n, ev, pair));
    }
    Err(Error::NonConvergent { defect: last_defect, n: schedule.last().copied().unwrap_or(0) })
}

/// Lowest `levels` quantum-Rabi eigenvalues converged over the schedule.
pub fn converged_quantum_spectrum(
    g: f64,
    p: &ModelParams,
    schedule: &[usize],
    levels: usize,
    tol: f64,
) -> Result<SpectrumResult> {
    let mut prev: Option<(usize, Vec<f64>)> = None;
    let mut last_defect = f64::INFINITY;
    for &n in schedule {
        let ev: Vec<f64> = build_quantum_rabi(g, p, n).eigenvalues().into_iter().take(levels).collect();
        if let Some((pn, pev)) = prev.take() {
            last_defect = pev.iter().zip(&ev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if pev.len() == ev.len() && last_defect <= tol * p.omega {
                return Ok(SpectrumResult {
                    kind: MatrixKind::QuantumRabi,
                    eigenvalues: pev,
                    folded_quasienergies: None,
                    truncation_used: pn,
                    convergence_defect: last_defect,
                    omega: p.omega,
                });
            }
        }
        prev = Some((n, ev));
    }
    Err(Error::NonConvergent { defect: last_defect, n: schedule.last().copied().unwrap_or(0) })
}

/// Default schedule N ∈ {10, 15, …, 60} for the Floquet matrix.
pub fn default_floquet_schedule() -> Vec<usize> {
    (10..=60).step_by(5).collect()
}

/// Default Fock schedule N ∈ {20, 40, …, 200}.
pub fn default_quantum_schedule() -> Vec<usize> {
    (20..=200).step_by(20).collect()
}

/// Folded quasienergy gap from the Floquet matrix.
pub fn floquet_gap(p: &ModelParams) -> Result<f64> {
    let s = converged_floquet_spectrum(p, &default_floquet_schedule(), SPECTRUM_TOL)?;
    Ok(s.quasienergy_gap().expect("floquet spectrum has a folded pair"))
}

/// Kind of a local gap minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingKind {
    Crossing,
    AntiCrossing,
}

impl CrossingKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CrossingKind::Crossing => "crossing",
            CrossingKind::AntiCrossing => "anti_crossing",
        }
    }
}

/// A refined local minimum of one gap along a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingEvent {
    /// Refined parameter location.
    pub delta: f64,
    /// Index of the sweep point nearest to the refined location.
    pub grid_index: usize,
    /// Which gap (pair of adjacent levels) the event belongs to.
    pub pair: usize,
    pub kind: CrossingKind,
    pub min_gap: f64,
}

/// Locate and classify local minima of the gaps returned by `gaps` along a
/// monotone grid. Each minimum is refined by golden-section search between
/// its grid neighbours and labeled a crossing when the refined gap is below
/// `threshold`.
pub fn classify_crossings<F>(grid: &[f64], gaps: F, threshold: f64) -> Vec<CrossingEvent>
where
    F: Fn(f64) -> Vec<f64>,
{
    let sampled: Vec<Vec<f64>> = grid.iter().map(|&d| gaps(d)).collect();
    classify_sampled(grid, &sampled, gaps, threshold)
}

/// As [`classify_crossings`] when the gaps on the grid are already known.
pub fn classify_sampled<F>(grid: &[f64], sampled: &[Vec<f64>], gaps: F, threshold: f64) -> Vec<CrossingEvent>
where
    F: Fn(f64) -> Vec<f64>,
{
    let mut events = Vec::new();
    if grid.len() < 3 {
        return events;
    }
    let pairs = sampled.iter().map(Vec::len).min().unwrap_or(0);
    for pair in 0..pairs {
        for j in 1..grid.len() - 1 {
            let (a, b, c) = (sampled[j - 1][pair], sampled[j][pair], sampled[j + 1][pair]);
            if !(b <= a && b < c) {
                continue;
            }
            let (x, neg) = golden_section_max(
                |d| -gaps(d).get(pair).copied().unwrap_or(f64::INFINITY),
                grid[j - 1],
                grid[j + 1],
                1e-12 * (1.0 + grid[j].abs()),
            );
            let min_gap = (-neg).min(b);
            let loc = if -neg <= b { x } else { grid[j] };
            let kind = if min_gap < threshold { CrossingKind::Crossing } else { CrossingKind::AntiCrossing };
            events.push(CrossingEvent { delta: loc, grid_index: j, pair, kind, min_gap });
        }
    }
    events.sort_by(|a, b| a.delta.total_cmp(&b.delta).then(a.pair.cmp(&b.pair)));
    events
}

/// Hidden-symmetry diagnosis at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenSymmetryReport {
    /// ε/ω.
    pub bias_ratio: f64,
    /// Whether ε/ω is an integer within tolerance.
    pub bias_integer: bool,
    /// |e^{iθ₊} − e^{iθ₋}|.
    pub phase_gap: f64,
    /// Whether the gap is below the degeneracy tolerance.
    pub phases_degenerate: bool,
    /// ‖U(T) − e^{iθ₊}I‖ (Frobenius).
    pub identity_distance: f64,
    /// Both conditions hold: cyclic states, and hence geometric quantities,
    /// are not uniquely defined.
    pub not_unique: bool,
}

pub fn hidden_symmetry_check(p: &ModelParams, r: &PropagationResult) -> HiddenSymmetryReport {
    let ut = r.final_unitary();
    let dec = cyclic_decomposition(&ut, p);
    let ratio = p.epsilon / p.omega;
    let bias_integer = (ratio - ratio.round()).abs() <= 1e-9 * ratio.abs().max(1.0);
    let [tp, tm] = dec.total_phases;
    let phase_gap = 2.0 * (0.5 * wrap_pi(tp - tm)).sin().abs();
    let phases_degenerate = phase_gap < DEGENERACY_TOL;
    let phase = num_complex::Complex64::from_polar(1.0, tp);
    let identity_distance = (ut - ComplexMat2::identity().scale(phase)).norm();
    HiddenSymmetryReport {
        bias_ratio: ratio,
        bias_integer,
        phase_gap,
        phases_degenerate,
        identity_distance,
        not_unique: bias_integer && phases_degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NumericPolicy;
    use crate::propagator::propagate;

    #[test]
    fn semiclassical_entries() {
        let p = ModelParams::unit(1.0, 0.5, 1.0).unwrap();
        let m = build_semiclassical_floquet(&p, 2);
        assert_eq!(m.dimension(), 10);
        // block j = 0 is n = −2
        assert_eq!(m.matrix[(0, 0)], -2.0 - 0.25);
        assert_eq!(m.matrix[(1, 1)], -2.0 + 0.25);
        assert_eq!(m.matrix[(0, 1)], -0.5);
        assert_eq!(m.matrix[(0, 2)], -0.25);
        assert_eq!(m.matrix[(1, 3)], 0.25);
        assert_eq!(m.matrix[(0, 3)], 0.0);
        assert_eq!(m.asymmetry(), 0.0);
    }

    #[test]
    fn quantum_entries() {
        let p = ModelParams::unit(1.0, 0.5, 0.0).unwrap();
        let m = build_quantum_rabi(2.0, &p, 3);
        assert_eq!(m.dimension(), 8);
        assert_eq!(m.matrix[(0, 2)], -0.5);
        assert_eq!(m.matrix[(1, 3)], 0.5);
        assert!((m.matrix[(2, 4)] + 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.matrix[(6, 6)], 3.0 - 0.25);
        assert_eq!(m.asymmetry(), 0.0);
    }

    #[test]
    fn decoupled_semiclassical_folds_to_bias() {
        let p = ModelParams::unit(0.0, 0.3, 0.0).unwrap();
        let s = converged_floquet_spectrum(&p, &[1, 6], SPECTRUM_TOL).unwrap();
        assert_eq!(s.truncation_used, 1);
        let [a, b] = s.folded_quasienergies.unwrap();
        assert!((a + 0.15).abs() < 1e-14 && (b - 0.15).abs() < 1e-14);
    }

    #[test]
    fn decoupled_quantum_ladder() {
        let p = ModelParams::unit(0.8, 0.6, 0.0).unwrap();
        let ev = build_quantum_rabi(0.0, &p, 4).eigenvalues();
        let half = 0.5;
        let mut expect: Vec<f64> = (0..=4).flat_map(|n| [n as f64 - half, n as f64 + half]).collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn floquet_matches_propagator() {
        let p = ModelParams::unit(1.0, 0.5, 1.0).unwrap();
        let s = converged_floquet_spectrum(&p, &default_floquet_schedule(), SPECTRUM_TOL).unwrap();
        let r = propagate(&p, &NumericPolicy::default()).unwrap();
        let d = cyclic_decomposition(&r.final_unitary(), &p);
        let mut q = d.quasienergies;
        q.sort_by(f64::total_cmp);
        let dist = pair_distance(q, s.folded_quasienergies.unwrap(), 1.0);
        assert!(dist < 1e-8, "{dist}");
    }

    #[test]
    fn interior_eigenvalues_form_ladders() {
        let p = ModelParams::unit(1.3, 0.4, 1.0).unwrap();
        let ev = build_semiclassical_floquet(&p, 25).eigenvalues();
        let pair = folded_pair(&ev, 1.0);
        for &e in ev.iter().filter(|e| e.abs() < 5.0) {
            let f = fold_quasienergy(e, 1.0);
            let d = circular_distance(f, pair[0], 1.0).min(circular_distance(f, pair[1], 1.0));
            assert!(d < 1e-10);
        }
    }

    #[test]
    fn quantum_spectrum_converges() {
        let p = ModelParams::unit(2.5, 1.0, 0.0).unwrap();
        let s = converged_quantum_spectrum(1.0, &p, &default_quantum_schedule(), 8, SPECTRUM_TOL).unwrap();
        assert!(s.convergence_defect <= SPECTRUM_TOL);
        assert_eq!(s.eigenvalues.len(), 8);
        assert!(s.truncation_used <= 60);
    }

    #[test]
    fn classification_of_synthetic_gaps() {
        let grid: Vec<f64> = (0..101).map(|k| k as f64 * 0.01).collect();
        let gaps = |d: f64| vec![(d - 0.3037).abs(), ((d - 0.7).powi(2) + 1e-4).sqrt()];
        let ev = classify_crossings(&grid, gaps, 1e-6);
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[0].kind, CrossingKind::Crossing);
        assert!((ev[0].delta - 0.3037).abs() < 1e-9);
        assert_eq!(ev[1].kind, CrossingKind::AntiCrossing);
        assert!((ev[1].min_gap - 1e-2).abs() < 1e-9);
    }

    #[test]
    fn static_revival_is_identity_times_phase() {
        // A = 0, ε = 0, Ξ₀T = 2π: U(T) = −I
        let p = ModelParams::unit(1.0, 0.0, 0.0).unwrap();
        let r = propagate(&p, &NumericPolicy::default()).unwrap();
        let rep = hidden_symmetry_check(&p, &r);
        assert!(rep.phases_degenerate);
        assert!(rep.identity_distance < 1e-10);
        assert!(rep.not_unique);
        // Ξ₀T = 4π: U(T) = I
        let p = ModelParams::unit(2.0, 0.0, 0.0).unwrap();
        let r = propagate(&p, &NumericPolicy::default()).unwrap();
        assert!((r.final_unitary() - ComplexMat2::identity()).max_abs() < 1e-10);
    }

    #[test]
    fn non_integer_bias_is_not_degenerate() {
        let p = ModelParams::unit(2.7993, 0.8, 1.0).unwrap();
        let r = propagate(&p, &NumericPolicy::default()).unwrap();
        let rep = hidden_symmetry_check(&p, &r);
        assert!(!rep.bias_integer && !rep.phases_degenerate && !rep.not_unique);
    }
}
