//! Bessel functions of the first kind for non-negative real argument,
//! plus cancellation-free combinations used by the CHRW method.

/// J_n(z) for integer n and real z, by Miller's downward recurrence
/// normalized with 1 = J₀ + 2ΣJ₂ₖ.
pub fn bessel_j(n: i32, z: f64) -> f64 {
    if n < 0 {
        let v = bessel_j(-n, z);
        return if n % 2 == 0 { v } else { -v };
    }
    if z < 0.0 {
        let v = bessel_j(n, -z);
        return if n % 2 == 0 { v } else { -v };
    }
    if z == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if z < 1e-3 {
        return series(n as u32, z);
    }
    let n = n as usize;
    let top = n.max(z.ceil() as usize) + 40 + (4.0 * z.sqrt()) as usize;
    let m = top + (top % 2);
    let mut jp1 = 0.0f64;
    let mut j = 1e-300f64;
    let mut norm = 0.0;
    let mut result = 0.0;
    for k in (1..=m).rev() {
        let jm1 = 2.0 * k as f64 / z * j - jp1;
        jp1 = j;
        j = jm1;
        let idx = k - 1;
        if idx == n {
            result = j;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            result *= 1e-250;
        }
    }
    norm += j;
    if n == 0 {
        result = j;
    }
    result / norm
}

pub fn j0(z: f64) -> f64 {
    bessel_j(0, z)
}

pub fn j1(z: f64) -> f64 {
    bessel_j(1, z)
}

pub fn j2(z: f64) -> f64 {
    bessel_j(2, z)
}

/// Power series Σ (−1)^k (z/2)^{2k+n} / (k!(k+n)!), accurate for small z.
fn series(n: u32, z: f64) -> f64 {
    let h = 0.5 * z;
    let mut term = h.powi(n as i32) / factorial(n);
    let mut sum = term;
    let q = -h * h;
    for k in 1..60u32 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

const SERIES_CUTOFF: f64 = 2.0;

/// (1 − J₀(z))/z², finite at z = 0 (value ¼).
pub fn one_minus_j0_over_z2(z: f64) -> f64 {
    if z.abs() >= SERIES_CUTOFF {
        return (1.0 - j0(z)) / (z * z);
    }
    // Σ_{k≥1} (−1)^{k+1} z^{2k−2} / (4^k (k!)²)
    let q = -0.25 * z * z;
    let mut term = 0.25;
    let mut sum = term;
    for k in 2..60u32 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// J₁(z)/z, finite at z = 0 (value ½).
pub fn j1_over_z(z: f64) -> f64 {
    if z.abs() >= SERIES_CUTOFF {
        return j1(z) / z;
    }
    // Σ_k (−1)^k z^{2k} / (2·4^k k!(k+1)!)
    let q = -0.25 * z * z;
    let mut term = 0.5;
    let mut sum = term;
    for k in 1..60u32 {
        term *= q / (k as f64 * (k + 1) as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// J₂(z)/z², finite at z = 0 (value ⅛).
pub fn j2_over_z2(z: f64) -> f64 {
    if z.abs() >= SERIES_CUTOFF {
        return j2(z) / (z * z);
    }
    let q = -0.25 * z * z;
    let mut term = 0.125;
    let mut sum = term;
    for k in 1..60u32 {
        term *= q / (k as f64 * (k + 2) as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// (1 − J₀(z) − J₂(z))/z², finite at z = 0 (value ⅛).
pub fn jc_over_z2(z: f64) -> f64 {
    one_minus_j0_over_z2(z) - j2_over_z2(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    /// Independent oracle: (1/2π)∮ cos(nτ − z sin τ) dτ by the trapezoid rule,
    /// which is spectrally accurate for this periodic integrand.
    fn integral_oracle(n: i32, z: f64) -> f64 {
        let m = 512;
        let h = TAU / m as f64;
        (0..m)
            .map(|k| {
                let t = h * k as f64;
                (n as f64 * t - z * t.sin()).cos()
            })
            .sum::<f64>()
            / m as f64
    }

    #[test]
    fn matches_integral_representation() {
        for &z in &[1e-6, 1e-3, 0.01, 0.3, 0.5, 1.0, 1.7, 2.4048, 3.0, 5.5, 7.0, 10.0] {
            for n in 0..6 {
                let a = bessel_j(n, z);
                let b = integral_oracle(n, z);
                assert!((a - b).abs() <= 2e-15 * (1.0 + b.abs()), "n={n} z={z}: {a} vs {b}");
            }
        }
    }

    /// Reference values computed with 30-digit arbitrary-precision arithmetic.
    const HIGH_PRECISION: [(f64, [f64; 3]); 7] = [
        (0.05, [0.999_375_097_649_468_6, 0.024_992_188_313_759_7, 0.000_312_434_900_919_384_5]),
        (0.2, [0.990_024_972_239_576_4, 0.099_500_832_639_236_0, 0.004_983_354_152_783_564]),
        (0.9, [0.807_523_798_122_544_8, 0.405_949_546_078_805_7, 0.094_586_304_274_801_17]),
        (1.5, [0.511_827_671_735_918_1, 0.557_936_507_910_099_6, 0.232_087_672_144_214_7]),
        (3.3, [-0.344_296_260_398_884_6, 0.220_663_452_985_241_16, 0.478_031_686_450_545_9]),
        (6.0, [0.150_645_257_250_996_93, -0.276_683_858_127_565_6, -0.242_873_209_960_185_47]),
        (9.5, [-0.193_928_747_687_422_36, 0.161_264_430_757_529_85, 0.227_879_154_162_691_8]),
    ];

    #[test]
    fn relative_accuracy_away_from_zeros() {
        for (z, vals) in HIGH_PRECISION {
            for (n, &b) in vals.iter().enumerate() {
                let a = bessel_j(n as i32, z);
                assert!((a - b).abs() <= 1e-14 * b.abs(), "n={n} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn known_values() {
        assert!((j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-16);
        assert!((j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-16);
        assert!((j2(2.0) - 0.352_834_028_615_637_7).abs() < 1e-16);
        assert_eq!(j0(0.0), 1.0);
        assert_eq!(j1(0.0), 0.0);
    }

    #[test]
    fn reflection_rules() {
        assert_eq!(bessel_j(-1, 0.7), -bessel_j(1, 0.7));
        assert_eq!(bessel_j(-2, 0.7), bessel_j(2, 0.7));
        assert_eq!(bessel_j(1, -0.7), -bessel_j(1, 0.7));
    }

    #[test]
    fn small_argument_combinations_are_continuous() {
        for &z in &[0.0, 1e-8, 1e-4, 0.5, 1.999_999, 2.0, 2.000_001, 4.0] {
            if z > 0.1 {
                assert!((one_minus_j0_over_z2(z) - (1.0 - integral_oracle(0, z)) / (z * z)).abs() < 1e-13);
                assert!((j1_over_z(z) - integral_oracle(1, z) / z).abs() < 1e-14);
                let jc = (1.0 - integral_oracle(0, z) - integral_oracle(2, z)) / (z * z);
                assert!((jc_over_z2(z) - jc).abs() < 1e-13);
            }
        }
        assert_eq!(one_minus_j0_over_z2(0.0), 0.25);
        assert_eq!(j1_over_z(0.0), 0.5);
        assert_eq!(jc_over_z2(0.0), 0.125);
        let z = 1.999_999_9;
        assert!((j1_over_z(z) - j1_over_z(z + 2e-7)).abs() < 1e-7);
    }
}
