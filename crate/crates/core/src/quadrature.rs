//! Composite Simpson quadrature on uniform grids.

/// Simpson's rule for samples on a uniform grid with spacing `h`.
///
/// An odd number of intervals is handled by closing the last three
/// intervals with the 3/8 rule.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        _ if n % 2 == 0 => simpson_even(values, h),
        3 => three_eighths(values, h),
        _ => simpson_even(&values[..n - 2], h) + three_eighths(&values[n - 3..], h),
    }
}

fn simpson_even(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    let mut odd = 0.0;
    let mut even = 0.0;
    for (k, v) in values.iter().enumerate().take(n).skip(1) {
        if k % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (values[0] + values[n] + 4.0 * odd + 2.0 * even)
}

fn three_eighths(v: &[f64], h: f64) -> f64 {
    3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3])
}

/// Integrate `f` over [a, b] with `n` Simpson intervals (rounded up to even).
pub fn simpson_fn<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let values: Vec<f64> = (0..=n).map(|k| f(a + h * k as f64)).collect();
    simpson(&values, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_for_cubics() {
        let v = simpson_fn(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 2);
        assert_abs_diff_eq!(v, 4.0 - 4.0 + 2.0, epsilon = 1e-14);
    }

    #[test]
    fn odd_interval_count() {
        let h = 0.1;
        let values: Vec<f64> = (0..=7).map(|k| (h * k as f64).exp()).collect();
        assert_abs_diff_eq!(simpson(&values, h), 0.7f64.exp() - 1.0, epsilon = 1e-6);
    }

    #[test]
    fn periodic_integrand() {
        let v = simpson_fn(|x| x.sin().powi(2), 0.0, std::f64::consts::TAU, 64);
        assert_abs_diff_eq!(v, std::f64::consts::PI, epsilon = 1e-12);
    }
}
