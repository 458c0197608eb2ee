//! Scalar root bracketing and one-dimensional maximization.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Locate all sign changes of `f` on a uniform scan of [lo, hi].
///
/// Returns bracketing pairs ((a, f(a)), (b, f(b))). Non-finite samples break
/// a bracket.
pub fn scan_sign_changes<F>(mut f: F, lo: f64, hi: f64, steps: usize) -> Vec<((f64, f64), (f64, f64))>
where
    F: FnMut(f64) -> f64,
{
    let mut out = Vec::new();
    let h = (hi - lo) / steps as f64;
    let mut prev = (lo, f(lo));
    for k in 1..=steps {
        let x = if k == steps { hi } else { lo + h * k as f64 };
        let cur = (x, f(x));
        if prev.1.is_finite() && cur.1.is_finite() && (prev.1 == 0.0 || prev.1 * cur.1 < 0.0) {
            out.push((prev, cur));
        }
        prev = cur;
    }
    out
}

/// Illinois-modified regula falsi on a sign-changing bracket.
pub fn refine_root<F>(mut f: F, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::NoRootInBracket { lo: a, hi: b });
    }
    for _ in 0..300 {
        if (b - a).abs() <= xtol {
            break;
        }
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c.is_finite() && c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
        let fc = f(c);
        if fc == 0.0 {
            return Ok(c);
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
        } else {
            fa *= 0.5;
        }
        b = c;
        fb = fc;
    }
    Ok(0.5 * (a + b))
}

/// Golden-section search for a maximum of `f` on [a, b].
///
/// Returns (argmax, max).
pub fn golden_section_max<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Uniform samples of [lo, hi] with `count` points (inclusive ends).
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (count - 1) as f64;
            (0..count).map(|k| if k + 1 == count { hi } else { lo + h * k as f64 }).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn finds_cubic_root() {
        let f = |x: f64| x * x * x - 2.0;
        let br = scan_sign_changes(f, 0.0, 3.0, 10);
        assert_eq!(br.len(), 1);
        let ((a, fa), (b, fb)) = br[0];
        let r = refine_root(f, a, fa, b, fb, 1e-14).unwrap();
        assert_abs_diff_eq!(r, 2f64.cbrt(), epsilon = 1e-12);
    }

    #[test]
    fn rejects_non_bracket() {
        assert!(refine_root(|x| x * x + 1.0, -1.0, 2.0, 1.0, 2.0, 1e-10).is_err());
    }

    #[test]
    fn golden_finds_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-10);
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-8);
        assert_abs_diff_eq!(fx, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.05, 4.0, 400);
        assert_eq!(v.len(), 400);
        assert_eq!(v[0], 0.05);
        assert_eq!(v[399], 4.0);
    }
}
