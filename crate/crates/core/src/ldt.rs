//! Large-deviation sweeps and continuity experiments.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{diophantine_scan, k0_for_scale_with};
use crate::cocycle::{finite_le_mean, pointwise_profile, Cocycle, Frequency, DET_TOL};
use crate::error::{Error, Result};
use crate::fourier::{gevrey_distance, FourierSeries, POTENTIAL_ENVELOPE_FLOOR};
use crate::sampling::{pairwise_mean, SamplerSpec};
use crate::scheme::{
    default_strip_samples, feasibility, strip_boundedness_audit, tail_sup_norm, SchemeParams,
};

/// Default LDT exponent: 1 on the circle, 1/2 on higher tori.
pub fn default_c(d: usize) -> f64 {
    if d == 1 {
        1.0
    } else {
        0.5
    }
}

/// `1 + c/(1+b)`: the exponent above which the LDT threshold stops decaying.
pub fn range_limit(b: f64, c: f64) -> f64 {
    1.0 + c / (1.0 + b)
}

pub fn check_range(s: f64, b: f64, c: f64) -> Result<()> {
    let limit = range_limit(b, c);
    if s < limit {
        Ok(())
    } else {
        Err(Error::RangeViolation { s, limit })
    }
}

fn check_ldt_args(c_a: f64, s: f64, n: u64, b: f64, c: f64) -> Result<()> {
    if !(c_a > 0.0) || !(s >= 1.0) || n == 0 || !(b > 0.0) || !(c > 0.0) {
        return Err(Error::invalid("ldt", "need C, N, b, c > 0 and s >= 1"));
    }
    Ok(())
}

/// `2 C^{1/s} N^{(s-1) - c/(1+b)}`.
pub fn ldt_threshold(c_a: f64, s: f64, n: u64, b: f64, c: f64) -> Result<f64> {
    check_ldt_args(c_a, s, n, b, c)?;
    Ok(2.0 * c_a.powf(1.0 / s) * (n as f64).powf((s - 1.0) - c / (1.0 + b)))
}

/// `-½ C^{-1/s} N^{(1-s) + c/(1+b)}`, the log of [`ldt_bound`] before clamping.
pub fn ldt_log_bound(c_a: f64, s: f64, n: u64, b: f64, c: f64) -> Result<f64> {
    check_ldt_args(c_a, s, n, b, c)?;
    Ok(-0.5 * c_a.powf(-1.0 / s) * (n as f64).powf((1.0 - s) + c / (1.0 + b)))
}

/// `exp(-½ C^{-1/s} N^{(1-s) + c/(1+b)})`, clamped to `(0, 1]`.
pub fn ldt_bound(c_a: f64, s: f64, n: u64, b: f64, c: f64) -> Result<f64> {
    Ok(ldt_log_bound(c_a, s, n, b, c)?
        .exp()
        .clamp(f64::MIN_POSITIVE, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationMeasure {
    /// Fraction of sample points with `|L_N(x) - mean| > ε`.
    pub measure: f64,
    pub mean: f64,
    /// 95% normal-approximation binomial half-width.
    pub half_width: f64,
    pub points: usize,
}

/// Empirical measure of the deviation set; the mean and the count use the
/// same sample points.
pub fn deviation_measure(
    a: &Cocycle,
    omega: &Frequency,
    n: usize,
    epsilon: f64,
    sampler: &SamplerSpec,
) -> Result<DeviationMeasure> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "deviation threshold must be > 0"));
    }
    let points = sampler.points(a.dim())?;
    let profile = pointwise_profile(a, omega, n, &points)?;
    Ok(count_deviations(&profile, epsilon))
}

fn count_deviations(profile: &[f64], epsilon: f64) -> DeviationMeasure {
    let mean = pairwise_mean(profile);
    let hits = profile.iter().filter(|&&v| (v - mean).abs() > epsilon).count();
    let len = profile.len() as f64;
    let p = hits as f64 / len;
    DeviationMeasure {
        measure: p,
        mean,
        half_width: 1.96 * (p * (1.0 - p) / len).sqrt(),
        points: profile.len(),
    }
}

/// Settings shared by every scale of an LDT sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdtConfig {
    pub b: f64,
    pub c: f64,
    pub kappa: f64,
    pub sampler: SamplerSpec,
    pub strip_samples: usize,
    /// Constant in `K₀ = ⌈scale · N^{1/(1+b)}⌉`.
    pub k0_scale: f64,
}

impl LdtConfig {
    pub fn new(d: usize) -> Self {
        Self {
            b: 1.0,
            c: default_c(d),
            kappa: 0.3,
            sampler: SamplerSpec::grid(4096),
            strip_samples: default_strip_samples(d),
            k0_scale: 1.0,
        }
    }
}

/// One scale of an LDT sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdtRecord {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "K0")]
    pub k0: u64,
    pub s: f64,
    pub b: f64,
    pub c: f64,
    pub kappa: f64,
    #[serde(rename = "C")]
    pub c_a: f64,
    /// Effective threshold `ε_raw · max(1, S)`.
    pub epsilon: f64,
    pub empirical_measure: f64,
    pub theoretical_bound: f64,
    #[serde(rename = "mean_LN")]
    pub mean_ln: f64,
    /// Margin condition of the scheme at this scale.
    pub feasible: bool,
    #[serde(rename = "scale_S")]
    pub scale_s: f64,
    /// `2 C^{1/s} N^{(s-1) - c/(1+b)}` before the `S` factor.
    pub raw_threshold: f64,
    pub measure_half_width: f64,
    pub m: u64,
    pub rho: f64,
}

pub const LDT_CSV_HEADER: [&str; 13] = [
    "N",
    "K0",
    "s",
    "b",
    "c",
    "kappa",
    "C",
    "epsilon",
    "empirical_measure",
    "theoretical_bound",
    "mean_LN",
    "feasible",
    "scale_S",
];

/// Floats with 17 significant digits.
pub(crate) fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_ldt_csv<W: Write>(out: W, records: &[LdtRecord]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LDT_CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.n.to_string(),
            r.k0.to_string(),
            fmt_float(r.s),
            fmt_float(r.b),
            fmt_float(r.c),
            fmt_float(r.kappa),
            fmt_float(r.c_a),
            fmt_float(r.epsilon),
            fmt_float(r.empirical_measure),
            fmt_float(r.theoretical_bound),
            fmt_float(r.mean_ln),
            r.feasible.to_string(),
            fmt_float(r.scale_s),
        ])?;
    }
    w.flush()
}

/// Runs the LDT pipeline at every `N`, in input order.
pub fn ldt_sweep(a: &Cocycle, omega: &Frequency, ns: &[u64], cfg: &LdtConfig) -> Result<Vec<LdtRecord>> {
    check_range(a.s(), cfg.b, cfg.c)?;
    ns.par_iter().map(|&n| ldt_at_scale(a, omega, n, cfg)).collect()
}

fn ldt_at_scale(a: &Cocycle, omega: &Frequency, n: u64, cfg: &LdtConfig) -> Result<LdtRecord> {
    let k0 = k0_for_scale_with(n, cfg.b, cfg.k0_scale)?;
    let scan = diophantine_scan(omega, k0, Some(cfg.kappa), cfg.b)?;
    if scan.satisfied == Some(false) {
        return Err(Error::DiophantineFailure {
            k0,
            worst_k: scan.worst_k,
            worst_value: scan.worst_value,
        });
    }
    let params = SchemeParams::for_cocycle(a, n, cfg.b, cfg.c, cfg.kappa, cfg.k0_scale)?;
    let steps = n as usize;
    let strip = strip_boundedness_audit(a, params.m, params.rho, omega, steps, cfg.strip_samples)?;

    let points = cfg.sampler.points(a.dim())?;
    let tail = tail_sup_norm(a, params.m, &points)?;
    let gap_log = 2f64.ln() + (n as f64).ln() + n as f64 * params.c_a.ln() + tail.ln();

    let raw = ldt_threshold(params.c_a, a.s(), n, cfg.b, cfg.c)?;
    let epsilon = raw * strip.scale_s.max(1.0);
    let profile = pointwise_profile(a, omega, steps, &points)?;
    let dev = count_deviations(&profile, epsilon);

    Ok(LdtRecord {
        n,
        k0,
        s: a.s(),
        b: cfg.b,
        c: cfg.c,
        kappa: cfg.kappa,
        c_a: params.c_a,
        epsilon,
        empirical_measure: dev.measure,
        theoretical_bound: ldt_bound(params.c_a, a.s(), n, cfg.b, cfg.c)?,
        mean_ln: dev.mean,
        feasible: feasibility(&params, gap_log),
        scale_s: strip.scale_s,
        raw_threshold: raw,
        measure_half_width: dev.half_width,
        m: params.m,
        rho: params.rho,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuityRecord {
    pub delta: f64,
    /// Largest entrywise sup-distance between `A` and `A_δ`.
    pub distance: f64,
    /// `|L_N(A_δ) - L_N(A)|` with both means on the same sampler.
    pub le_gap: f64,
    #[serde(rename = "N")]
    pub n: u64,
}

/// Continuity sweep along `δ ↦ family(δ)`, sorted by `δ`.
pub fn continuity_experiment<F>(
    a: &Cocycle,
    family: F,
    deltas: &[f64],
    omega: &Frequency,
    n: usize,
    sampler: &SamplerSpec,
) -> Result<Vec<ContinuityRecord>>
where
    F: Fn(f64) -> Result<Cocycle> + Sync,
{
    if deltas.iter().any(|d| !(*d >= 0.0)) {
        return Err(Error::invalid("deltas", "perturbation sizes must be >= 0"));
    }
    let base = finite_le_mean(a, omega, n, sampler)?.mean;
    let mut sorted = deltas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .iter()
        .map(|&delta| {
            let perturbed = family(delta)?;
            let mut distance = 0.0f64;
            for (x, y) in a
                .entries()
                .iter()
                .flatten()
                .zip(perturbed.entries().iter().flatten())
            {
                distance = distance.max(gevrey_distance(x, y)?.sup);
            }
            let mean = finite_le_mean(&perturbed, omega, n, sampler)?.mean;
            Ok(ContinuityRecord {
                delta,
                distance,
                le_gap: (mean - base).abs(),
                n: n as u64,
            })
        })
        .collect()
}

/// Running maximum of `le_gap` over the (sorted) records.
pub fn gap_envelope(records: &[ContinuityRecord]) -> Vec<f64> {
    records
        .iter()
        .scan(0.0f64, |acc, r| {
            *acc = acc.max(r.le_gap);
            Some(*acc)
        })
        .collect()
}

/// `δ ↦ Schrödinger(v + δ w, E)` at exponent `s`.
pub fn potential_family(
    potential: FourierSeries,
    direction: FourierSeries,
    energy: Complex64,
    s: f64,
) -> impl Fn(f64) -> Result<Cocycle> + Sync {
    move |delta| {
        let v = potential.add(&direction.scale(Complex64::new(delta, 0.0)))?;
        Cocycle::schrodinger(&v, energy)?.with_exponent(s)
    }
}

/// Terms of the binomial series for `(1 + u)^{-1/2}` are kept while the
/// `ℓ¹` bound of the next term exceeds this.
const INV_SQRT_TOL: f64 = 1e-16;
const INV_SQRT_MAX_TERMS: usize = 200;

/// `(1 + u)^{-1/2}` as a Fourier series, for `‖u‖_{ℓ¹} < 1`.
fn inverse_sqrt_series(det: &FourierSeries) -> Result<FourierSeries> {
    let d = det.dim();
    let one = FourierSeries::constant(d, Complex64::new(1.0, 0.0));
    let u = det.sub(&one)?;
    let r = u.l1_norm();
    if !(r < 1.0) {
        return Err(Error::invalid(
            "delta",
            format!("determinant too far from 1 for the series inverse square root (‖det - 1‖ = {r})"),
        ));
    }
    let mut sum = one.clone();
    let mut power = one;
    let mut coeff = 1.0;
    let mut bound = 1.0;
    for j in 1..=INV_SQRT_MAX_TERMS {
        coeff *= -(j as f64 - 0.5) / j as f64;
        bound *= r;
        if coeff.abs() * bound < INV_SQRT_TOL {
            break;
        }
        power = power.mul(&u, u64::MAX, POTENTIAL_ENVELOPE_FLOOR)?;
        sum = sum.add(&power.scale(Complex64::new(coeff, 0.0)))?;
    }
    Ok(sum)
}

/// `δ ↦ (A + δB) / √det(A + δB)`, the square root taken as a truncated
/// binomial series at the coefficient level; the result is re-audited.
pub fn additive_family(
    a: Cocycle,
    direction: [[FourierSeries; 2]; 2],
) -> Result<impl Fn(f64) -> Result<Cocycle> + Sync> {
    if let Some(bad) = direction.iter().flatten().find(|e| e.dim() != a.dim()) {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: bad.dim(),
        });
    }
    Ok(move |delta: f64| {
        if delta == 0.0 {
            return Ok(a.clone());
        }
        let t = Complex64::new(delta, 0.0);
        let mut e: Vec<FourierSeries> = Vec::with_capacity(4);
        for (x, y) in a.entries().iter().flatten().zip(direction.iter().flatten()) {
            e.push(x.add(&y.scale(t))?);
        }
        let unbounded = u64::MAX;
        let det = e[0]
            .mul(&e[3], unbounded, 0.0)?
            .sub(&e[1].mul(&e[2], unbounded, 0.0)?)?;
        let w = inverse_sqrt_series(&det)?;
        let cut = |x: &FourierSeries| x.mul(&w, unbounded, POTENTIAL_ENVELOPE_FLOOR);
        let entries = [[cut(&e[0])?, cut(&e[1])?], [cut(&e[2])?, cut(&e[3])?]];
        let c = Cocycle::new(entries, a.s())?;
        debug_assert!(c.det_deviation() <= DET_TOL);
        Ok(c)
    })
}
