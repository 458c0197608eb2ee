//! 2×2 complex matrices and two-component spinors.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// A two-component state vector.
pub type Spinor = [Complex64; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense 2×2 complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMat2(pub [[Complex64; 2]; 2]);

impl ComplexMat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self([[a, b], [c, d]])
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn sigma_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub const fn sigma_y() -> Self {
        Self::new(ZERO, Complex64::new(0.0, -1.0), I, ZERO)
    }

    pub const fn sigma_z() -> Self {
        Self::new(ONE, ZERO, ZERO, Complex64::new(-1.0, 0.0))
    }

    /// c₀·I + b·σ with real coefficients (Hermitian).
    pub fn from_pauli(c0: f64, b: [f64; 3]) -> Self {
        Self::new(
            Complex64::new(c0 + b[2], 0.0),
            Complex64::new(b[0], -b[1]),
            Complex64::new(b[0], b[1]),
            Complex64::new(c0 - b[2], 0.0),
        )
    }

    /// Complex Pauli decomposition (c₀, c) with M = c₀I + c·σ.
    pub fn pauli_components(&self) -> (Complex64, [Complex64; 3]) {
        let m = &self.0;
        let c0 = (m[0][0] + m[1][1]) * 0.5;
        let cx = (m[0][1] + m[1][0]) * 0.5;
        let cy = (m[1][0] - m[0][1]) * Complex64::new(0.0, -0.5);
        let cz = (m[0][0] - m[1][1]) * 0.5;
        (c0, [cx, cy, cz])
    }

    /// exp(−i θ n̂·σ) for a real vector b = θ n̂ (the generator of one step).
    pub fn su2_exp(b: [f64; 3]) -> Self {
        let theta = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        if theta == 0.0 {
            return Self::identity();
        }
        let (s, c) = theta.sin_cos();
        let f = s / theta;
        Self::new(
            Complex64::new(c, -f * b[2]),
            Complex64::new(-f * b[1], -f * b[0]),
            Complex64::new(f * b[1], -f * b[0]),
            Complex64::new(c, f * b[2]),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.0;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |(U†U − I)_ij|.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - Self::identity()).max_abs()
    }

    /// |u₁ − u₄*| + |u₂ + u₃*| + |det U − 1|, zero exactly on SU(2).
    pub fn su2_defect(&self) -> f64 {
        let m = &self.0;
        (m[0][0] - m[1][1].conj()).norm()
            + (m[0][1] + m[1][0].conj()).norm()
            + (self.det() - ONE).norm()
    }

    /// One Newton–Schulz step towards the nearest unitary: U(3I − U†U)/2.
    pub fn unitary_projection_step(&self) -> Self {
        let g = self.adjoint() * *self;
        let corr = Self::identity().scale(Complex64::new(3.0, 0.0)) - g;
        (*self * corr).scale(Complex64::new(0.5, 0.0))
    }

    pub fn apply(&self, v: &Spinor) -> Spinor {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }
}

impl Mul for ComplexMat2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let a = &self.0;
        let b = &o.0;
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for ComplexMat2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let a = &self.0;
        let b = &o.0;
        Self::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for ComplexMat2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let a = &self.0;
        let b = &o.0;
        Self::new(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1])
    }
}

/// ⟨a|b⟩.
pub fn inner(a: &Spinor, b: &Spinor) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

pub fn normalize(v: Spinor) -> Spinor {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Bloch vector (⟨σx⟩, ⟨σy⟩, ⟨σz⟩) of a normalized state.
pub fn bloch_vector(v: &Spinor) -> [f64; 3] {
    let c = v[0].conj() * v[1];
    [2.0 * c.re, 2.0 * c.im, v[0].norm_sqr() - v[1].norm_sqr()]
}

/// Real 2-vector promoted to a spinor.
pub fn real_spinor(a: f64, b: f64) -> Spinor {
    [Complex64::new(a, 0.0), Complex64::new(b, 0.0)]
}
