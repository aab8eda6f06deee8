//! Finitely supported Fourier series on `T^d = R^d / Z^d`, Gevrey decay
//! certificates, truncation, and evaluation on the torus and on complex
//! strips.
//!
//! Characters are `exp(2πi k·x)` and `|k|` is the max-norm on `Z^d`, so the
//! truncation `|k| <= m` keeps a box of coefficients.

mod kernel;
mod serial;

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::PointSet;

pub(crate) use kernel::Kernel;

/// Floor applied to every certified decay constant.
pub const C_MIN: f64 = 1e-6;

/// Largest supported torus dimension.
pub const MAX_DIM: usize = 3;

/// Grid points per dimension used by [`gevrey_distance`] and sup-norm audits.
pub fn distance_grid_resolution(d: usize) -> usize {
    match d {
        1 => 4096,
        2 => 256,
        _ => 32,
    }
}

/// A multi-index in `Z^d`, ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector(Vec<i64>);

impl LatticeVector {
    pub fn new(components: Vec<i64>) -> Self {
        assert!(!components.is_empty(), "lattice vectors need d >= 1");
        Self(components)
    }

    pub fn zero(d: usize) -> Self {
        Self::new(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    /// Max-norm.
    pub fn norm(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum()
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl From<i64> for LatticeVector {
    fn from(k: i64) -> Self {
        Self(vec![k])
    }
}

impl From<Vec<i64>> for LatticeVector {
    fn from(v: Vec<i64>) -> Self {
        Self::new(v)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A point `x + i y` of the complex strip around `T^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct StripPoint {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl StripPoint {
    pub fn new(re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch {
                expected: re.len(),
                found: im.len(),
            });
        }
        if im.iter().chain(&re).any(|v| !v.is_finite()) {
            return Err(Error::invalid("strip point", "coordinates must be finite"));
        }
        let re = re.into_iter().map(reduce_mod_one).collect();
        Ok(Self { re, im })
    }

    pub fn real(x: Vec<f64>) -> Result<Self> {
        let d = x.len();
        Self::new(x, vec![0.0; d])
    }

    pub fn real_part(&self) -> &[f64] {
        &self.re
    }

    pub fn imag_part(&self) -> &[f64] {
        &self.im
    }

    /// `|Im z|` in the max-norm.
    pub fn imag_norm(&self) -> f64 {
        self.im.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Reduces `t` to `[0, 1)`.
pub fn reduce_mod_one(t: f64) -> f64 {
    let r = t - t.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Decay certificate `|ĝ(k)| <= M·exp(-C^{-1/s} |k|^{1/s})` for all `k != 0`.
///
/// `prefactor` (`M`) is 1 for certificates produced by [`gevrey_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyCertificate {
    pub s: f64,
    pub c: f64,
    pub prefactor: f64,
}

impl GevreyCertificate {
    /// Value of the certified envelope at `|k|`.
    pub fn envelope(&self, k_norm: f64) -> f64 {
        self.prefactor * (-self.c.powf(-1.0 / self.s) * k_norm.powf(1.0 / self.s)).exp()
    }

    /// Checks the decay bound on every nonzero mode of `series`, allowing a
    /// relative slack of `rel_tol` on the amplitude.
    pub fn holds_for(&self, series: &FourierSeries, rel_tol: f64) -> bool {
        series
            .iter()
            .filter(|(k, _)| !k.is_zero())
            .all(|(k, a)| a.norm() <= self.envelope(k.norm() as f64) * (1.0 + rel_tol))
    }
}

/// A finitely supported map `Z^d -> C`, representing
/// `g(x) = Σ ĝ(k) exp(2πi k·x)`. Zero amplitudes are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    dim: usize,
    coeffs: BTreeMap<LatticeVector, Complex64>,
}

impl FourierSeries {
    /// The zero series in dimension `d`.
    pub fn zero(d: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&d), "dimension must be in 1..={MAX_DIM}");
        Self {
            dim: d,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(d: usize, value: Complex64) -> Self {
        let mut s = Self::zero(d);
        s.add_term(LatticeVector::zero(d), value);
        s
    }

    /// Builds a series from `(k, amplitude)` pairs; repeated keys are summed.
    pub fn from_terms<I, K>(d: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, Complex64)>,
        K: Into<LatticeVector>,
    {
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::invalid("d", format!("dimension must be in 1..={MAX_DIM}")));
        }
        let mut s = Self::zero(d);
        for (k, a) in terms {
            let k = k.into();
            if k.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: k.dim(),
                });
            }
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::invalid(
                    "coefficient",
                    format!("non-finite amplitude at k = {k}"),
                ));
            }
            s.add_term(k, a);
        }
        Ok(s)
    }

    /// One-dimensional convenience constructor from real amplitudes.
    pub fn from_real_1d(terms: &[(i64, f64)]) -> Self {
        Self::from_terms(1, terms.iter().map(|&(k, a)| (k, Complex64::new(a, 0.0))))
            .expect("one-dimensional terms are always well formed")
    }

    fn add_term(&mut self, k: LatticeVector, a: Complex64) {
        use std::collections::btree_map::Entry;
        let zero = Complex64::new(0.0, 0.0);
        match self.coeffs.entry(k) {
            Entry::Vacant(slot) => {
                if a != zero {
                    slot.insert(a);
                }
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += a;
                if *slot.get() == zero {
                    slot.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: &LatticeVector) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticeVector, &Complex64)> {
        self.coeffs.iter()
    }

    /// Largest `|k|` in the support (0 for the zero series).
    pub fn degree(&self) -> u64 {
        self.coeffs.keys().map(LatticeVector::norm).max().unwrap_or(0)
    }

    /// True if the series has no mode other than `k = 0`.
    pub fn is_constant(&self) -> bool {
        self.coeffs.keys().all(LatticeVector::is_zero)
    }

    /// Amplitude sum `Σ |ĝ(k)|`, an upper bound for the sup-norm.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|a| a.norm()).sum()
    }

    /// `Σ |ĝ(k)| exp(2π |k| y)`, the modulus majorant on `|Im z| <= y`.
    pub fn strip_majorant(&self, y: f64) -> f64 {
        self.iter()
            .map(|(k, a)| a.norm() * (TAU * k.norm() as f64 * y.abs()).exp())
            .sum()
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: d,
            })
        }
    }

    /// Keeps exactly the modes with `|k| <= m`.
    pub fn truncate(&self, m: u64) -> Self {
        Self {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| k.norm() <= m)
                .map(|(k, a)| (k.clone(), *a))
                .collect(),
        }
    }

    /// The complementary tail `g - truncate(g, m)`.
    pub fn tail(&self, m: u64) -> Self {
        Self {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| k.norm() > m)
                .map(|(k, a)| (k.clone(), *a))
                .collect(),
        }
    }

    pub fn scale(&self, t: Complex64) -> Self {
        let mut out = Self::zero(self.dim);
        for (k, a) in &self.coeffs {
            out.add_term(k.clone(), a * t);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        let mut out = self.clone();
        for (k, a) in &other.coeffs {
            out.add_term(k.clone(), *a);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Convolution product, keeping modes with `|k| <= max_degree` and
    /// dropping amplitudes below `drop_below`.
    pub fn mul(&self, other: &Self, max_degree: u64, drop_below: f64) -> Result<Self> {
        self.check_dim(other.dim)?;
        let mut acc: BTreeMap<LatticeVector, Complex64> = BTreeMap::new();
        for (k1, a1) in &self.coeffs {
            for (k2, a2) in &other.coeffs {
                let k = k1.add(k2);
                if k.norm() <= max_degree {
                    *acc.entry(k).or_default() += a1 * a2;
                }
            }
        }
        Ok(Self {
            dim: self.dim,
            coeffs: acc
                .into_iter()
                .filter(|(_, a)| a.norm() > drop_below && *a != Complex64::new(0.0, 0.0))
                .collect(),
        })
    }

    /// `Σ ĝ(k) exp(2πi k·x)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        self.check_dim(x.len())?;
        Ok(self.coeffs.iter().map(|(k, a)| a * cis_turns(k.dot(x))).sum())
    }

    /// `Σ ĝ(k) exp(2πi k·(x + iy))`.
    pub fn evaluate_strip(&self, z: &StripPoint) -> Result<Complex64> {
        self.check_dim(z.re.len())?;
        Ok(self
            .coeffs
            .iter()
            .map(|(k, a)| a * cis_turns(k.dot(&z.re)) * (-TAU * k.dot(&z.im)).exp())
            .sum())
    }

    pub(crate) fn kernel(&self) -> Kernel {
        Kernel::compile(self)
    }

    /// Maximum modulus over a point set.
    pub fn sup_on(&self, points: &PointSet) -> Result<f64> {
        self.check_dim(points.dim())?;
        let kernel = self.kernel();
        Ok((0..points.len())
            .into_par_iter()
            .map(|i| kernel.eval(points.get(i), None).norm())
            .reduce(|| 0.0, f64::max))
    }

    /// Random-phase series saturating the `s`-Gevrey envelope:
    /// `|ĝ(k)| = amplitude · exp(-decay^{-1/s} |k|^{1/s})` for `k != 0`,
    /// `ĝ(0) = 0`, with `ĝ(-k) = conj ĝ(k)` so the function is real.
    ///
    /// Modes are kept while the unit envelope stays above `1e-18` and the
    /// box stays within [`POTENTIAL_TERM_BUDGET`] terms.
    pub fn gevrey_random_phase(d: usize, s: f64, decay: f64, amplitude: f64, seed: u64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::invalid("d", format!("dimension must be in 1..={MAX_DIM}")));
        }
        if !(s >= 1.0) || !(decay > 0.0) {
            return Err(Error::invalid("s/decay", "need s >= 1 and decay > 0"));
        }
        let rate = decay.powf(-1.0 / s);
        // envelope >= floor  <=>  |k| <= (ln(1/floor)/rate)^s
        let k_floor = ((-POTENTIAL_ENVELOPE_FLOOR.ln()) / rate).powf(s).floor() as u64;
        let k_budget = (((POTENTIAL_TERM_BUDGET as f64).powf(1.0 / d as f64) - 1.0) / 2.0).floor() as u64;
        let kmax = k_floor.min(k_budget).max(1) as i64;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for k in half_lattice(d, kmax) {
            let amp = amplitude * (-rate * (k.norm() as f64).powf(1.0 / s)).exp();
            let phase: f64 = rng.random::<f64>() * TAU;
            let a = Complex64::from_polar(amp, phase);
            terms.push((k.neg(), a.conj()));
            terms.push((k, a));
        }
        Self::from_terms(d, terms)
    }
}

/// Unit-envelope floor below which random-phase modes are dropped.
pub const POTENTIAL_ENVELOPE_FLOOR: f64 = 1e-18;

/// Maximum box size `(2K+1)^d` for generated potentials.
pub const POTENTIAL_TERM_BUDGET: usize = 200_001;

/// Lattice vectors `0 < |k| <= kmax` whose first nonzero component is
/// positive, in lexicographic order.
pub fn half_lattice(d: usize, kmax: i64) -> impl Iterator<Item = LatticeVector> {
    let side = (2 * kmax + 1) as u64;
    let total = side.pow(d as u32);
    (0..total).filter_map(move |mut idx| {
        let mut comps = vec![0i64; d];
        for slot in comps.iter_mut().rev() {
            *slot = (idx % side) as i64 - kmax;
            idx /= side;
        }
        let leading = comps.iter().find(|&&c| c != 0).copied().unwrap_or(0);
        (leading > 0).then(|| LatticeVector::new(comps))
    })
}

/// `exp(2πi t)` with `t` reduced mod 1 first.
pub(crate) fn cis_turns(t: f64) -> Complex64 {
    let (s, c) = (TAU * reduce_mod_one(t)).sin_cos();
    Complex64::new(c, s)
}

/// Certifies `|ĝ(k)| <= exp(-C^{-1/s}|k|^{1/s})` with the minimal `C`,
/// floored at [`C_MIN`].
pub fn gevrey_constant(series: &FourierSeries, s: f64) -> Result<GevreyCertificate> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    certify(series, s, 1.0)
}

/// Like [`gevrey_constant`] but certifying against `M·exp(...)`.
pub fn gevrey_constant_with_prefactor(
    series: &FourierSeries,
    s: f64,
    prefactor: f64,
) -> Result<GevreyCertificate> {
    if !(prefactor >= 1.0) {
        return Err(Error::invalid("prefactor", "must be >= 1"));
    }
    certify(series, s, prefactor)
}

/// Prefactor used for cocycle entries: `max(1, e · max_{k≠0} |ĝ(k)|)`.
///
/// Entries whose nonzero modes stay below `1/e` get the plain certificate;
/// larger entries are measured relative to their own leading amplitude.
pub fn entry_prefactor(series: &FourierSeries) -> f64 {
    let lead = series
        .iter()
        .filter(|(k, _)| !k.is_zero())
        .map(|(_, a)| a.norm())
        .fold(0.0, f64::max);
    (std::f64::consts::E * lead).max(1.0)
}

fn certify(series: &FourierSeries, s: f64, prefactor: f64) -> Result<GevreyCertificate> {
    if !(s >= 1.0) {
        return Err(Error::invalid(
            "s",
            format!("Gevrey exponent must be >= 1, got {s}"),
        ));
    }
    let mut c = C_MIN;
    for (k, a) in series.iter().filter(|(k, _)| !k.is_zero()) {
        let amp = a.norm();
        let log_ratio = (prefactor / amp).ln();
        if !(log_ratio > 0.0) {
            return Err(Error::NoFiniteConstant {
                k: k.clone(),
                amplitude: amp / prefactor,
            });
        }
        c = c.max(k.norm() as f64 * log_ratio.powf(-s));
    }
    Ok(GevreyCertificate { s, c, prefactor })
}

/// Nominal truncation bound `exp(-C^{-1/s} m^{1/s})` (no lattice-count factor).
pub fn sup_error_nominal(cert: &GevreyCertificate, m: u64) -> f64 {
    (-cert.c.powf(-1.0 / cert.s) * (m as f64).powf(1.0 / cert.s)).exp()
}

/// Distance between two series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesDistance {
    /// Sup-norm of `a - b` on the dense grid.
    pub sup: f64,
    /// Coefficient `ℓ¹` distance, an upper bound for the true sup-norm.
    pub l1: f64,
}

pub fn gevrey_distance(a: &FourierSeries, b: &FourierSeries) -> Result<SeriesDistance> {
    let diff = a.sub(b)?;
    let grid = PointSet::grid(a.dim(), distance_grid_resolution(a.dim()));
    Ok(SeriesDistance {
        sup: diff.sup_on(&grid)?,
        l1: diff.l1_norm(),
    })
}
