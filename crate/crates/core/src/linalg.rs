//! Complex 2×2 matrices with a closed-form operator norm.

use std::ops::{Mul, Sub};

use num_complex::Complex64;

/// A complex 2×2 matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[Complex64; 2]; 2],
}

impl Mat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Self::from_real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::from_real(c, -s, s, c)
    }

    pub fn det(&self) -> Complex64 {
        let [[a, b], [c, d]] = self.m;
        a * d - b * c
    }

    pub fn scale(&self, t: f64) -> Self {
        let [[a, b], [c, d]] = self.m;
        Self::new(a * t, b * t, c * t, d * t)
    }

    pub fn is_finite(&self) -> bool {
        self.m
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Squared Frobenius norm; bounds `‖·‖²` above by at most a factor 2.
    pub fn frobenius_sqr(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    /// Largest singular value.
    ///
    /// Uses `σ₁ ± σ₂ = sqrt(F ± 2|det|)`, with `F ± 2|det|` rewritten as a sum
    /// of squared moduli `|a ± u·d̄|² + |b ∓ u·c̄|²` where `u = det/|det|`. Both
    /// radicands are computed without cancellation, so unitary matrices get
    /// norm 1 to rounding.
    pub fn op_norm(&self) -> f64 {
        let [[a, b], [c, d]] = self.m;
        let det = a * d - b * c;
        let r = det.norm();
        let u = if r > 0.0 {
            det / r
        } else {
            Complex64::new(1.0, 0.0)
        };
        let ud = u * d.conj();
        let uc = u * c.conj();
        let plus = (a + ud).norm_sqr() + (b - uc).norm_sqr();
        let minus = (a - ud).norm_sqr() + (b + uc).norm_sqr();
        0.5 * (plus.sqrt() + minus.sqrt())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let [[a, b], [c, d]] = self.m;
        let [[e, f], [g, h]] = rhs.m;
        Mat2::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        let [[a, b], [c, d]] = self.m;
        let [[e, f], [g, h]] = rhs.m;
        Mat2::new(a - e, b - f, c - g, d - h)
    }
}
