//! Quasi-periodic `SL(2,C)` cocycles over a torus rotation, their iterates
//! `A_N(x) = A(x+(N-1)ω)···A(x)`, and finite-scale Lyapunov exponents.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{
    entry_prefactor, gevrey_constant_with_prefactor, reduce_mod_one, FourierSeries, GevreyCertificate,
    Kernel, StripPoint, MAX_DIM,
};
use crate::linalg::Mat2;
use crate::sampling::{pairwise_mean, PointSet, SamplerSpec};

/// Tolerance on `|det A(x) - 1|` over the audit grid.
pub const DET_TOL: f64 = 1e-8;

/// Total points of the determinant / sup-norm audit grid.
pub const AUDIT_POINTS: usize = 1024;

/// The running product is rescaled to unit norm once its Frobenius norm
/// exceeds `2^128`.
pub const RENORM_THRESHOLD: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

/// Rotation number `ω ∈ [0,1)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Frequency {
    omega: Vec<f64>,
}

impl Frequency {
    /// Components are reduced modulo 1.
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() || omega.len() > MAX_DIM {
            return Err(Error::invalid("omega", format!("need 1..={MAX_DIM} components")));
        }
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("omega", "components must be finite"));
        }
        Ok(Self {
            omega: omega.into_iter().map(reduce_mod_one).collect(),
        })
    }

    /// `(√5 - 1)/2`.
    pub fn golden() -> Self {
        Self {
            omega: vec![(5f64.sqrt() - 1.0) / 2.0],
        }
    }

    pub fn components(&self) -> &[f64] {
        &self.omega
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }
}

impl TryFrom<Vec<f64>> for Frequency {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Frequency> for Vec<f64> {
    fn from(f: Frequency) -> Self {
        f.omega
    }
}

/// `ln ‖A_N(x)‖` accumulated in log-space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterateResult {
    pub log_norm: f64,
    pub renorm_count: u32,
    /// `ln |det A_N(x)|` recovered from the rescaled product.
    pub log_abs_det: f64,
    /// Largest single-step norm `‖A(x + jω)‖` met along the orbit.
    pub max_factor_norm: f64,
}

/// A 2×2 matrix of Fourier series over `T^d`, unimodular on the audit grid.
#[derive(Debug, Clone)]
pub struct Cocycle {
    entries: [[FourierSeries; 2]; 2],
    s: f64,
    certs: [[GevreyCertificate; 2]; 2],
    c_a: f64,
    sup_norm: f64,
    det_deviation: f64,
    kernels: [[Kernel; 2]; 2],
}

impl PartialEq for Cocycle {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries && self.s == other.s
    }
}

impl Cocycle {
    /// Builds a cocycle with Gevrey exponent `s`, rejecting it if
    /// `|det A - 1| > DET_TOL` somewhere on the audit grid.
    pub fn new(entries: [[FourierSeries; 2]; 2], s: f64) -> Result<Self> {
        let cocycle = Self::build(entries, s)?;
        if cocycle.det_deviation > DET_TOL {
            return Err(Error::NotUnimodular {
                deviation: cocycle.det_deviation,
                tolerance: DET_TOL,
            });
        }
        Ok(cocycle)
    }

    fn build(entries: [[FourierSeries; 2]; 2], s: f64) -> Result<Self> {
        if !(s >= 1.0) {
            return Err(Error::invalid(
                "s",
                format!("Gevrey exponent must be >= 1, got {s}"),
            ));
        }
        let d = entries[0][0].dim();
        for e in entries.iter().flatten() {
            if e.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: e.dim(),
                });
            }
        }
        let cert = |e: &FourierSeries| gevrey_constant_with_prefactor(e, s, entry_prefactor(e));
        let certs = [
            [cert(&entries[0][0])?, cert(&entries[0][1])?],
            [cert(&entries[1][0])?, cert(&entries[1][1])?],
        ];
        let kernels = [
            [entries[0][0].kernel(), entries[0][1].kernel()],
            [entries[1][0].kernel(), entries[1][1].kernel()],
        ];
        let mut cocycle = Self {
            entries,
            s,
            certs,
            c_a: 1.0,
            sup_norm: 0.0,
            det_deviation: 0.0,
            kernels,
        };

        let grid = audit_grid(d);
        let (sup_norm, det_deviation) = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let m = cocycle.eval_fast(grid.get(i), None);
                (m.op_norm(), (m.det() - 1.0).norm())
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        let max_cert = certs.iter().flatten().map(|c| c.c).fold(0.0, f64::max);
        cocycle.sup_norm = sup_norm;
        cocycle.det_deviation = det_deviation;
        cocycle.c_a = 1f64.max(max_cert).max((1.0 + sup_norm).ln());
        Ok(cocycle)
    }

    /// Schrödinger cocycle `[[E - v, -1], [1, 0]]`, with `s = 1`.
    pub fn schrodinger(potential: &FourierSeries, energy: Complex64) -> Result<Self> {
        let d = potential.dim();
        let e = FourierSeries::constant(d, energy);
        let top = e.sub(potential)?;
        Self::new(
            [
                [top, FourierSeries::constant(d, Complex64::new(-1.0, 0.0))],
                [
                    FourierSeries::constant(d, Complex64::new(1.0, 0.0)),
                    FourierSeries::zero(d),
                ],
            ],
            1.0,
        )
    }

    /// Constant cocycle over `T^d`.
    pub fn constant(m: Mat2, d: usize) -> Result<Self> {
        let [[a, b], [c, dd]] = m.m;
        let k = |z| FourierSeries::constant(d, z);
        Self::new([[k(a), k(b)], [k(c), k(dd)]], 1.0)
    }

    /// Same entries certified at a different Gevrey exponent.
    pub fn with_exponent(self, s: f64) -> Result<Self> {
        Self::new(self.entries, s)
    }

    /// `A^{(m)}`: every entry truncated to `|k| <= m`.
    ///
    /// The truncation is not required to pass the unimodularity audit; its
    /// deviation is available from [`Cocycle::det_deviation`].
    pub fn truncate(&self, m: u64) -> Result<Self> {
        let e = &self.entries;
        Self::build(
            [
                [e[0][0].truncate(m), e[0][1].truncate(m)],
                [e[1][0].truncate(m), e[1][1].truncate(m)],
            ],
            self.s,
        )
    }

    /// Entrywise `A - A^{(m)}`.
    pub fn tail(&self, m: u64) -> [[FourierSeries; 2]; 2] {
        let e = &self.entries;
        [
            [e[0][0].tail(m), e[0][1].tail(m)],
            [e[1][0].tail(m), e[1][1].tail(m)],
        ]
    }

    pub fn dim(&self) -> usize {
        self.entries[0][0].dim()
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn entries(&self) -> &[[FourierSeries; 2]; 2] {
        &self.entries
    }

    pub fn certificates(&self) -> &[[GevreyCertificate; 2]; 2] {
        &self.certs
    }

    /// `C(A) = max(1, max entry constant, ln(1 + sup ‖A‖))`.
    pub fn aggregate_constant(&self) -> f64 {
        self.c_a
    }

    /// Largest operator norm on the audit grid.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Largest `|det A(x) - 1|` on the audit grid.
    pub fn det_deviation(&self) -> f64 {
        self.det_deviation
    }

    /// Largest entry degree.
    pub fn degree(&self) -> u64 {
        self.entries
            .iter()
            .flatten()
            .map(FourierSeries::degree)
            .max()
            .unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.kernels.iter().flatten().all(Kernel::is_constant)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Mat2> {
        self.check_dim(x.len())?;
        let e = &self.entries;
        Ok(Mat2::new(
            e[0][0].evaluate(x)?,
            e[0][1].evaluate(x)?,
            e[1][0].evaluate(x)?,
            e[1][1].evaluate(x)?,
        ))
    }

    pub fn eval_strip(&self, z: &StripPoint) -> Result<Mat2> {
        self.check_dim(z.real_part().len())?;
        let e = &self.entries;
        Ok(Mat2::new(
            e[0][0].evaluate_strip(z)?,
            e[0][1].evaluate_strip(z)?,
            e[1][0].evaluate_strip(z)?,
            e[1][1].evaluate_strip(z)?,
        ))
    }

    #[inline]
    pub(crate) fn eval_fast(&self, x: &[f64], y: Option<&[f64]>) -> Mat2 {
        let k = &self.kernels;
        let mut base = None;
        Mat2::new(
            k[0][0].eval_shared(x, y, &mut base),
            k[0][1].eval_shared(x, y, &mut base),
            k[1][0].eval_shared(x, y, &mut base),
            k[1][1].eval_shared(x, y, &mut base),
        )
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: d,
            })
        }
    }

    pub(crate) fn iterate_at(
        &self,
        omega: &Frequency,
        n: usize,
        x: &[f64],
        y: Option<&[f64]>,
    ) -> Result<IterateResult> {
        if n == 0 {
            return Err(Error::invalid("N", "iteration count must be >= 1"));
        }
        self.check_dim(x.len())?;
        self.check_dim(omega.dim())?;
        let d = x.len();
        let w = omega.components();
        let fixed = self.is_constant().then(|| self.eval_fast(x, y));
        if fixed.is_some_and(|m| !m.is_finite()) {
            return Err(Error::NonFinite { step: 0 });
        }
        let renorm_sqr = RENORM_THRESHOLD * RENORM_THRESHOLD;

        let mut p = Mat2::identity();
        let mut log_norm = 0.0;
        let mut renorm_count = 0;
        let mut max_factor_norm = fixed.map_or(0.0, |m| m.op_norm());
        let mut point = [0.0f64; MAX_DIM];
        for j in 0..n {
            let a = match fixed {
                Some(m) => m,
                None => {
                    for i in 0..d {
                        point[i] = reduce_mod_one(x[i] + j as f64 * w[i]);
                    }
                    let m = self.eval_fast(&point[..d], y);
                    if !m.is_finite() {
                        return Err(Error::NonFinite { step: j });
                    }
                    max_factor_norm = max_factor_norm.max(m.op_norm());
                    m
                }
            };
            p = a * p;
            let size = p.frobenius_sqr();
            if !size.is_finite() {
                return Err(Error::NonFinite { step: j });
            }
            if size > renorm_sqr {
                let norm = p.op_norm();
                p = p.scale(1.0 / norm);
                log_norm += norm.ln();
                renorm_count += 1;
            }
        }
        let final_norm = p.op_norm();
        let log_abs_det = p.det().norm().ln() + 2.0 * log_norm;
        Ok(IterateResult {
            log_norm: log_norm + final_norm.ln(),
            renorm_count,
            log_abs_det,
            max_factor_norm,
        })
    }
}

fn audit_grid(d: usize) -> PointSet {
    let per_dim = (AUDIT_POINTS as f64).powf(1.0 / d as f64).round() as usize;
    PointSet::grid(d, per_dim)
}

/// `A_N(x)` with overflow-safe rescaling.
pub fn iterate(a: &Cocycle, omega: &Frequency, n: usize, x: &[f64]) -> Result<IterateResult> {
    a.iterate_at(omega, n, x, None)
}

/// `A_N(z)` at a point of the complex strip (ω stays real).
pub fn iterate_strip(a: &Cocycle, omega: &Frequency, n: usize, z: &StripPoint) -> Result<IterateResult> {
    a.iterate_at(omega, n, z.real_part(), Some(z.imag_part()))
}

/// `L_N(A, x, ω) = max(ln ‖A_N(x)‖, 0) / N`.
pub fn finite_le_pointwise(a: &Cocycle, omega: &Frequency, n: usize, x: &[f64]) -> Result<f64> {
    Ok(iterate(a, omega, n, x)?.log_norm.max(0.0) / n as f64)
}

/// `L_N` at every point of `points`, in order.
pub fn pointwise_profile(a: &Cocycle, omega: &Frequency, n: usize, points: &PointSet) -> Result<Vec<f64>> {
    (0..points.len())
        .into_par_iter()
        .map(|i| finite_le_pointwise(a, omega, n, points.get(i)))
        .collect()
}

/// Quadrature estimate of `(1/N) ∫ ln₊ ‖A_N(x)‖ dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanLe {
    pub mean: f64,
    pub resolution: usize,
    pub points: usize,
}

pub fn finite_le_mean(a: &Cocycle, omega: &Frequency, n: usize, sampler: &SamplerSpec) -> Result<MeanLe> {
    let points = sampler.points(a.dim())?;
    let values = pointwise_profile(a, omega, n, &points)?;
    Ok(MeanLe {
        mean: pairwise_mean(&values),
        resolution: sampler.resolution(),
        points: values.len(),
    })
}

mod serial {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Cocycle;
    use crate::fourier::FourierSeries;

    #[derive(Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct CocycleRepr {
        s: f64,
        a11: FourierSeries,
        a12: FourierSeries,
        a21: FourierSeries,
        a22: FourierSeries,
    }

    impl Serialize for Cocycle {
        fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
            let [[a11, a12], [a21, a22]] = self.entries.clone();
            CocycleRepr {
                s: self.s,
                a11,
                a12,
                a21,
                a22,
            }
            .serialize(serializer)
        }
    }

    impl<'de> Deserialize<'de> for Cocycle {
        fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
            let r = CocycleRepr::deserialize(deserializer)?;
            Cocycle::new([[r.a11, r.a12], [r.a21, r.a22]], r.s).map_err(D::Error::custom)
        }
    }

    impl Cocycle {
        /// Parses the JSON layout, keeping construction errors (such as
        /// [`Error::NotUnimodular`](crate::Error::NotUnimodular)) distinct
        /// from malformed input.
        pub fn from_json(text: &str) -> crate::Result<Self> {
            let r: CocycleRepr =
                serde_json::from_str(text).map_err(|e| crate::Error::invalid("cocycle", e.to_string()))?;
            Cocycle::new([[r.a11, r.a12], [r.a21, r.a22]], r.s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::E;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn hyperbolic() -> Cocycle {
        Cocycle::constant(Mat2::from_real(E, 0.0, 0.0, 1.0 / E), 1).unwrap()
    }

    fn amo(lambda: f64, energy: f64) -> Cocycle {
        let v = FourierSeries::from_real_1d(&[(-1, lambda), (1, lambda)]);
        Cocycle::schrodinger(&v, c(energy)).unwrap()
    }

    /// `max_i ‖A_N e_i‖` propagated vector-wise with its own rescaling; lies
    /// in `[‖A_N‖/√2, ‖A_N‖]`.
    fn vector_oracle(a: &Cocycle, omega: &Frequency, n: usize, x: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for start in [[c(1.0), c(0.0)], [c(0.0), c(1.0)]] {
            let mut v = start;
            let mut log = 0.0;
            for j in 0..n {
                let p = (x + j as f64 * omega.components()[0]).rem_euclid(1.0);
                let m = a.eval(&[p]).unwrap().m;
                v = [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
                let len = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
                v = [v[0] / len, v[1] / len];
                log += len.ln();
            }
            best = best.max(log);
        }
        best
    }

    #[test]
    fn schrodinger_entries() {
        let zero = Cocycle::schrodinger(&FourierSeries::zero(1), c(0.0)).unwrap();
        assert_eq!(zero.eval(&[0.3]).unwrap(), Mat2::from_real(0.0, -1.0, 1.0, 0.0));
        let two = Cocycle::schrodinger(&FourierSeries::zero(1), c(2.0)).unwrap();
        assert_eq!(two.eval(&[0.7]).unwrap(), Mat2::from_real(2.0, -1.0, 1.0, 0.0));

        let a = amo(3.0, 0.5);
        let top = &a.entries()[0][0];
        assert_eq!(top.coeff(&1.into()), c(-3.0));
        assert_eq!(top.coeff(&(-1).into()), c(-3.0));
        assert_eq!(top.coeff(&0.into()), c(0.5));
        assert_eq!(a.det_deviation(), 0.0);
    }

    #[test]
    fn constant_builder_checks_determinant() {
        assert!(Cocycle::constant(Mat2::identity(), 1).is_ok());
        assert!(matches!(
            Cocycle::constant(Mat2::from_real(2.0, 0.0, 0.0, 1.0), 1),
            Err(Error::NotUnimodular { .. })
        ));
    }

    #[test]
    fn aggregate_constant_dominates_entries() {
        let v = FourierSeries::gevrey_random_phase(1, 1.2, 1.0, 3.0, 9).unwrap();
        let a = Cocycle::schrodinger(&v, c(0.0))
            .unwrap()
            .with_exponent(1.2)
            .unwrap();
        let ca = a.aggregate_constant();
        assert!(ca >= 1.0);
        assert!(a.certificates().iter().flatten().all(|cert| ca >= cert.c));
        assert!(ca >= (1.0 + a.sup_norm()).ln());
        assert!((a.certificates()[0][0].c - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oracle_cocycles_small_n() {
        let golden = Frequency::golden();
        let id = Cocycle::constant(Mat2::identity(), 1).unwrap();
        let rot = Cocycle::constant(Mat2::rotation(0.9), 1).unwrap();
        for n in [1, 7, 100] {
            for x in [0.0, 0.3, 0.99] {
                assert_eq!(finite_le_pointwise(&id, &golden, n, &[x]).unwrap(), 0.0);
                assert!(finite_le_pointwise(&rot, &golden, n, &[x]).unwrap() < 1e-15);
                assert!((finite_le_pointwise(&hyperbolic(), &golden, n, &[x]).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn renormalization_is_exact_for_diagonal() {
        let r = iterate(&hyperbolic(), &Frequency::golden(), 100, &[0.2]).unwrap();
        assert!((r.log_norm - 100.0).abs() < 1e-9);
        assert_eq!(r.renorm_count, 1);
        let r = iterate(&hyperbolic(), &Frequency::golden(), 10_000, &[0.2]).unwrap();
        assert!((r.log_norm - 10_000.0).abs() < 1e-9 * 10_000.0);
        assert!(r.renorm_count > 100);
        let id = iterate(
            &Cocycle::constant(Mat2::identity(), 1).unwrap(),
            &Frequency::golden(),
            100_000,
            &[0.0],
        )
        .unwrap();
        assert_eq!(id.log_norm, 0.0);
    }

    #[test]
    fn herman_lower_bound_and_vector_oracle() {
        let a = amo(3.0, 0.0);
        let golden = Frequency::golden();
        let r = iterate(&a, &golden, 1000, &[0.0]).unwrap();
        assert!(r.log_norm / 1000.0 >= 3f64.ln() - 0.05, "{}", r.log_norm / 1000.0);
        let oracle = vector_oracle(&a, &golden, 1000, 0.0);
        assert!(oracle <= r.log_norm + 1e-9);
        assert!(oracle >= r.log_norm - 0.5 * 2f64.ln() - 1e-9);
    }

    #[test]
    fn mean_of_oracle_cocycles() {
        let golden = Frequency::golden();
        for g in [1, 16, 257] {
            let sampler = SamplerSpec::grid(g);
            let id = Cocycle::constant(Mat2::identity(), 1).unwrap();
            assert_eq!(finite_le_mean(&id, &golden, 10, &sampler).unwrap().mean, 0.0);
            let m = finite_le_mean(&hyperbolic(), &golden, 10, &sampler).unwrap();
            assert!((m.mean - 1.0).abs() < 1e-12);
            assert_eq!(m.points, g);
        }
    }

    #[test]
    fn mean_resolution_self_consistency() {
        let a = amo(3.0, 0.0);
        let golden = Frequency::golden();
        let coarse = finite_le_mean(&a, &golden, 1000, &SamplerSpec::grid(2048))
            .unwrap()
            .mean;
        let fine = finite_le_mean(&a, &golden, 1000, &SamplerSpec::grid(4096))
            .unwrap()
            .mean;
        assert!((coarse - fine).abs() < 1e-3, "{coarse} vs {fine}");
    }

    #[test]
    fn mean_is_bit_stable() {
        let a = amo(1.5, 0.3);
        let golden = Frequency::golden();
        let s = SamplerSpec::LowDiscrepancy { resolution: 999 };
        let first = finite_le_mean(&a, &golden, 50, &s).unwrap().mean;
        for _ in 0..3 {
            assert_eq!(
                finite_le_mean(&a, &golden, 50, &s).unwrap().mean.to_bits(),
                first.to_bits()
            );
        }
    }

    #[test]
    fn subadditivity_along_doublings() {
        let v = FourierSeries::gevrey_random_phase(1, 1.2, 1.0, 2.0, 3).unwrap();
        let a = Cocycle::schrodinger(&v, c(0.4)).unwrap();
        let golden = Frequency::golden();
        let w = golden.components()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x: f64 = rng.random();
            let mut n = 8;
            while n <= 256 {
                let whole = iterate(&a, &golden, 2 * n, &[x]).unwrap().log_norm;
                let first = iterate(&a, &golden, n, &[x]).unwrap().log_norm;
                let second = iterate(&a, &golden, n, &[(x + n as f64 * w).rem_euclid(1.0)])
                    .unwrap()
                    .log_norm;
                assert!(whole <= first + second + 1e-9);
                n *= 2;
            }
        }
    }

    #[test]
    fn determinant_preserved_on_real_cocycles() {
        // A rotation-valued cocycle R(2πx) and a subcritical Schrödinger one.
        let half = Complex64::new(0.5, 0.0);
        let half_i = Complex64::new(0.0, 0.5);
        let cos = FourierSeries::from_terms(1, vec![(1, half), (-1, half)]).unwrap();
        let sin = FourierSeries::from_terms(1, vec![(1, -half_i), (-1, half_i)]).unwrap();
        let rot = Cocycle::new([[cos.clone(), sin.scale(c(-1.0))], [sin, cos]], 1.0).unwrap();
        let golden = Frequency::golden();
        for a in [rot, amo(0.5, 0.0)] {
            for n in [10, 1000, 10_000] {
                for x in [0.0, 0.421] {
                    let r = iterate(&a, &golden, n, &[x]).unwrap();
                    assert!(
                        r.log_abs_det.abs() <= n as f64 * 1e-10,
                        "n={n}: {}",
                        r.log_abs_det
                    );
                }
            }
        }
    }

    #[test]
    fn non_finite_entries_are_reported() {
        let v = FourierSeries::from_real_1d(&[(1, 1e300), (-1, 1e300), (2, 1e300)]);
        let a = Cocycle::build(
            [[v.clone(), v.clone()], [v, FourierSeries::constant(1, c(1.0))]],
            1.0,
        );
        // Entries this large overflow the audit itself.
        if let Ok(a) = a {
            assert!(matches!(
                iterate(&a, &Frequency::golden(), 10, &[0.0]),
                Err(Error::NonFinite { .. })
            ));
        }
    }

    #[test]
    fn dimension_and_argument_checks() {
        let a = amo(1.0, 0.0);
        assert!(iterate(&a, &Frequency::golden(), 0, &[0.0]).is_err());
        assert!(matches!(
            iterate(&a, &Frequency::new(vec![0.1, 0.2]).unwrap(), 5, &[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(Frequency::new(vec![1.25]).unwrap().components(), &[0.25]);
    }

    #[test]
    fn cocycle_json_round_trip() {
        let v = FourierSeries::gevrey_random_phase(1, 1.1, 1.0, 3.0, 2).unwrap();
        let a = Cocycle::schrodinger(&v, c(0.0))
            .unwrap()
            .with_exponent(1.1)
            .unwrap();
        let json = serde_json::to_string(&a).unwrap();
        let back: Cocycle = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.aggregate_constant(), a.aggregate_constant());
        let bad = r#"{"s":1.0,"a11":{"d":1,"coeffs":[{"k":[0],"re":2.0,"im":0.0}]},"a12":{"d":1,"coeffs":[]},"a21":{"d":1,"coeffs":[]},"a22":{"d":1,"coeffs":[{"k":[0],"re":1.0,"im":0.0}]}}"#;
        assert!(serde_json::from_str::<Cocycle>(bad).is_err());
    }
}
