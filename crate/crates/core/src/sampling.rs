//! Point sets on the torus and deterministic reductions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How to sample the torus `[0,1)^d` for quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SamplerSpec {
    /// Equispaced tensor grid with `resolution` points per dimension.
    Grid { resolution: usize },
    /// First `resolution^d` points of the additive Rd sequence.
    LowDiscrepancy { resolution: usize },
}

impl SamplerSpec {
    pub fn grid(resolution: usize) -> Self {
        SamplerSpec::Grid { resolution }
    }

    pub fn resolution(&self) -> usize {
        match *self {
            SamplerSpec::Grid { resolution } | SamplerSpec::LowDiscrepancy { resolution } => resolution,
        }
    }

    pub fn point_count(&self, d: usize) -> Result<usize> {
        let g = self.resolution();
        if g == 0 {
            return Err(Error::invalid("resolution", "sampler resolution must be >= 1"));
        }
        let n = (g as f64).powi(d as i32);
        if n > MAX_SAMPLE_POINTS as f64 {
            return Err(Error::BudgetExceeded {
                what: "sampler",
                requested: n,
                budget: MAX_SAMPLE_POINTS as f64,
            });
        }
        Ok(g.pow(d as u32))
    }

    pub fn points(&self, d: usize) -> Result<PointSet> {
        let n = self.point_count(d)?;
        Ok(match *self {
            SamplerSpec::Grid { resolution } => PointSet::grid(d, resolution),
            SamplerSpec::LowDiscrepancy { .. } => RdSequence::new(d).take_points(n),
        })
    }
}

/// Upper bound on the number of quadrature points a sampler may request.
pub const MAX_SAMPLE_POINTS: usize = 1 << 26;

/// A flat list of points in `[0,1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    d: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn from_flat(d: usize, coords: Vec<f64>) -> Self {
        assert!(d >= 1 && coords.len().is_multiple_of(d));
        Self { d, coords }
    }

    /// Tensor grid `{i/g}^d`, last coordinate varying fastest.
    pub fn grid(d: usize, g: usize) -> Self {
        let n = g.pow(d as u32);
        let mut coords = Vec::with_capacity(n * d);
        let mut idx = vec![0usize; d];
        for _ in 0..n {
            coords.extend(idx.iter().map(|&i| i as f64 / g as f64));
            for slot in idx.iter_mut().rev() {
                *slot += 1;
                if *slot < g {
                    break;
                }
                *slot = 0;
            }
        }
        Self { d, coords }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }
}

/// Additive recurrence `x_n = frac(1/2 + n·α)` with `α_j = φ_d^{-(j+1)}`,
/// where `φ_d` is the positive root of `x^{d+1} = x + 1`.
///
/// State is kept in 64-bit fixed point so the sequence is exact for any
/// index that fits in a `u64`.
#[derive(Debug, Clone)]
pub struct RdSequence {
    alpha: Vec<u64>,
    index: u64,
}

impl RdSequence {
    pub fn new(d: usize) -> Self {
        let mut phi = 2.0f64;
        for _ in 0..64 {
            let f = phi.powi(d as i32 + 1) - phi - 1.0;
            let df = (d as f64 + 1.0) * phi.powi(d as i32) - 1.0;
            phi -= f / df;
        }
        let alpha = (1..=d)
            .map(|j| {
                let a = phi.powi(-(j as i32));
                (a.fract() * TWO_POW_64) as u64
            })
            .collect();
        Self { alpha, index: 0 }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn point(&self, n: u64) -> Vec<f64> {
        self.alpha
            .iter()
            .map(|&a| {
                let v = (1u64 << 63).wrapping_add(a.wrapping_mul(n));
                v as f64 / TWO_POW_64
            })
            .map(|x| if x >= 1.0 { 0.0 } else { x })
            .collect()
    }

    pub fn take_points(mut self, n: usize) -> PointSet {
        let d = self.dim();
        let mut coords = Vec::with_capacity(n * d);
        for _ in 0..n {
            coords.extend(self.point(self.index));
            self.index += 1;
        }
        PointSet { d, coords }
    }
}

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// Pairwise (cascade) summation in a fixed order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Maximum ignoring NaN; `-inf` for an empty slice.
pub fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout() {
        let p = PointSet::grid(2, 3);
        assert_eq!(p.len(), 9);
        assert_eq!(p.get(0), &[0.0, 0.0]);
        assert_eq!(p.get(1), &[0.0, 1.0 / 3.0]);
        assert_eq!(p.get(3), &[1.0 / 3.0, 0.0]);
    }

    #[test]
    fn rd_sequence_one_dim_is_golden_rotation() {
        let seq = RdSequence::new(1);
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        for n in 0..50u64 {
            let expect = (0.5 + n as f64 * golden).fract();
            assert!((seq.point(n)[0] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn rd_points_in_unit_cube() {
        let pts = RdSequence::new(3).take_points(1000);
        assert!(pts.iter().flatten().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn rd_discrepancy_small() {
        // Fraction in [0, 1/2)^2 should approach 1/4.
        let pts = RdSequence::new(2).take_points(4096);
        let hits = pts.iter().filter(|p| p[0] < 0.5 && p[1] < 0.5).count();
        assert!((hits as f64 / 4096.0 - 0.25).abs() < 5e-3);
    }

    #[test]
    fn pairwise_sum_matches_exact_integers() {
        let v: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 49_995_000.0);
    }

    #[test]
    fn zero_resolution_rejected() {
        assert!(SamplerSpec::grid(0).points(1).is_err());
    }
}
