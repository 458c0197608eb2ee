//! Harmonic-resonance positions in Δ by several routes: the CHRW condition
//! Ω̃ = mω, its second-order-in-A estimate, the maximum of the time–energy
//! uncertainty of the exact cyclic states, and the minimum of the folded
//! quasienergy gap.

use crate::chrw::{rabi_frequency_2nd_order, solve_self_consistent, RabiConvention};
use crate::error::{Error, Result};
use crate::floquet::floquet_gap;
use crate::geometry::{cyclic_decomposition, time_energy_uncertainty};
use crate::model::{ModelParams, NumericPolicy};
use crate::optimize::{golden_section_max, linspace, refine_root, scan_sign_changes};
use crate::propagator::propagate;

/// Default search bracket in Δ/ω.
pub const SEARCH_BRACKET: (f64, f64) = (0.05, 4.5);

/// Half-width of the window around the CHRW estimate that the numeric
/// methods search, in units of ω.
pub const NUMERIC_WINDOW: f64 = 0.15;

/// Sampling step of the numeric window before golden-section refinement.
pub const NUMERIC_STEP: f64 = 0.002;

/// How a resonance position is determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceMethod {
    /// Root of Ω̃(Δ) = mω from the self-consistent CHRW solution.
    Chrw,
    /// Root of Ω̃₂(Δ) = mω with the second-order estimate of Ω̃.
    SecondOrder(RabiConvention),
    /// Local maximum of the uncertainty s(Δ) of the exact cyclic states.
    Numeric,
    /// Local minimum of the folded Floquet quasienergy gap.
    GapMinimum,
}

impl ResonanceMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ResonanceMethod::Chrw => "chrw",
            ResonanceMethod::SecondOrder(RabiConvention::Squared) => "second_order",
            ResonanceMethod::SecondOrder(RabiConvention::Literal) => "second_order_literal",
            ResonanceMethod::Numeric => "numeric",
            ResonanceMethod::GapMinimum => "gap_minimum",
        }
    }
}

fn bracket_steps(lo: f64, hi: f64) -> usize {
    ((hi - lo) / 0.01).ceil().max(8.0) as usize
}

/// Root in Δ of Ω̃(Δ) = mω on the physical (δ̃ > 0) side, the smallest such
/// root in the search bracket.
pub fn chrw_resonance(p_base: &ModelParams, order: u32, policy: &NumericPolicy) -> Result<f64> {
    let target = order as f64 * p_base.omega;
    let (lo, hi) = SEARCH_BRACKET;
    let (lo, hi) = (lo * p_base.omega, hi * p_base.omega);
    let condition = |d: f64| match solve_self_consistent(&p_base.with_delta(d), policy) {
        Ok(s) => (s.omega_t - target, s.delta_det),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let brackets = scan_sign_changes(|d| condition(d).0, lo, hi, bracket_steps(lo, hi));
    for ((a, fa), (b, fb)) in brackets {
        let root = refine_root(|d| condition(d).0, a, fa, b, fb, 1e-12 * (1.0 + a.abs()))?;
        if condition(root).1 > 0.0 {
            return Ok(root);
        }
    }
    Err(Error::NoRootInBracket { lo, hi })
}

/// Root in Δ of the second-order estimate Ω̃₂(Δ) = mω.
pub fn second_order_resonance(p_base: &ModelParams, order: u32, convention: RabiConvention) -> Result<f64> {
    let target = order as f64 * p_base.omega;
    let (lo, hi) = (SEARCH_BRACKET.0 * p_base.omega, SEARCH_BRACKET.1 * p_base.omega);
    let f = |d: f64| {
        let pd = p_base.with_delta(d);
        // Physical side: bare splitting above the drive frequency.
        if pd.static_splitting() <= p_base.omega {
            return f64::NAN;
        }
        rabi_frequency_2nd_order(&pd, convention).map(|o| o - target).unwrap_or(f64::NAN)
    };
    let brackets = scan_sign_changes(f, lo, hi, bracket_steps(lo, hi));
    let ((a, fa), (b, fb)) = *brackets.first().ok_or(Error::NoRootInBracket { lo, hi })?;
    refine_root(f, a, fa, b, fb, 1e-12 * (1.0 + a.abs()))
}

/// Uncertainty s of the exact cyclic states at one parameter point.
pub fn uncertainty_at(p: &ModelParams, policy: &NumericPolicy) -> Result<f64> {
    let r = propagate(p, policy)?;
    let dec = cyclic_decomposition(&r.final_unitary(), p);
    Ok(time_energy_uncertainty(&r, &dec.states[0], p))
}

/// A refined local maximum of s(Δ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyPeak {
    pub delta: f64,
    pub uncertainty: f64,
}

/// All interior local maxima of s(Δ) on a uniform grid over [lo, hi] with
/// the given step, each refined by golden-section search.
pub fn maximize_uncertainty(
    p: &ModelParams,
    lo: f64,
    hi: f64,
    step: f64,
    policy: &NumericPolicy,
) -> Result<Vec<UncertaintyPeak>> {
    let count = ((hi - lo) / step).round().max(2.0) as usize + 1;
    let grid = linspace(lo, hi, count);
    let values = grid
        .iter()
        .map(|&d| uncertainty_at(&p.with_delta(d), policy))
        .collect::<Result<Vec<_>>>()?;
    let mut peaks = Vec::new();
    for j in 1..grid.len() - 1 {
        if values[j] >= values[j - 1] && values[j] > values[j + 1] {
            let (x, fx) = golden_section_max(
                |d| uncertainty_at(&p.with_delta(d), policy).unwrap_or(f64::NEG_INFINITY),
                grid[j - 1],
                grid[j + 1],
                1e-9,
            );
            let (delta, uncertainty) = if fx >= values[j] { (x, fx) } else { (grid[j], values[j]) };
            peaks.push(UncertaintyPeak { delta, uncertainty });
        }
    }
    Ok(peaks)
}

fn nearest_peak(peaks: &[UncertaintyPeak], center: f64) -> Option<UncertaintyPeak> {
    peaks.iter().copied().min_by(|a, b| (a.delta - center).abs().total_cmp(&(b.delta - center).abs()))
}

/// Resonance position by the chosen method. `order` m selects the condition
/// Ω̃ = mω: m = 1 is the second harmonic, m = 2 the third.
///
/// The numeric and gap-minimum methods search a window of half-width
/// [`NUMERIC_WINDOW`] around the CHRW root and return the extremum nearest
/// to it.
pub fn resonance_position(
    p_base: &ModelParams,
    order: u32,
    method: ResonanceMethod,
    policy: &NumericPolicy,
) -> Result<f64> {
    if order == 0 {
        return Err(Error::InvalidParams("resonance order must be at least 1".into()));
    }
    match method {
        ResonanceMethod::Chrw => chrw_resonance(p_base, order, policy),
        ResonanceMethod::SecondOrder(conv) => second_order_resonance(p_base, order, conv),
        ResonanceMethod::Numeric => {
            let c = chrw_resonance(p_base, order, policy)?;
            let w = NUMERIC_WINDOW * p_base.omega;
            let (lo, hi) = ((c - w).max(SEARCH_BRACKET.0 * p_base.omega), c + w);
            let peaks = maximize_uncertainty(p_base, lo, hi, NUMERIC_STEP * p_base.omega, policy)?;
            nearest_peak(&peaks, c).map(|pk| pk.delta).ok_or(Error::NoRootInBracket { lo, hi })
        }
        ResonanceMethod::GapMinimum => {
            let c = chrw_resonance(p_base, order, policy)?;
            let w = NUMERIC_WINDOW * p_base.omega;
            let (lo, hi) = ((c - w).max(SEARCH_BRACKET.0 * p_base.omega), c + w);
            let count = ((hi - lo) / (NUMERIC_STEP * p_base.omega)).round() as usize + 1;
            let grid = linspace(lo, hi, count);
            let gap = |d: f64| floquet_gap(&p_base.with_delta(d));
            let values = grid.iter().map(|&d| gap(d)).collect::<Result<Vec<_>>>()?;
            let mut best: Option<f64> = None;
            for j in 1..grid.len() - 1 {
                if values[j] <= values[j - 1] && values[j] < values[j + 1] {
                    let (x, _) = golden_section_max(|d| -gap(d).unwrap_or(f64::INFINITY), grid[j - 1], grid[j + 1], 1e-10);
                    if best.map_or(true, |b| (x - c).abs() < (b - c).abs()) {
                        best = Some(x);
                    }
                }
            }
            best.ok_or(Error::NoRootInBracket { lo, hi })
        }
    }
}
