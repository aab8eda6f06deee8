//! Torus distance, exhaustive Diophantine resonance scans and the
//! `K₀ ↔ N` scale couplings.

use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::Frequency;
use crate::error::{Error, Result};
use crate::fourier::LatticeVector;

/// Largest number of lattice points a scan may enumerate.
pub const SCAN_BUDGET: f64 = 1e9;

/// Distance from `t` to the nearest integer.
pub fn torus_norm(t: f64) -> f64 {
    (t - t.round()).abs()
}

/// Outcome of a restricted Diophantine scan over `0 < |k| <= K₀`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiophantineReport {
    pub k0: u64,
    /// Minimiser of `‖k·ω‖` (first in lexicographic order among ties).
    pub worst_k: LatticeVector,
    pub worst_value: f64,
    /// Empirically tightest constant `min_k ‖k·ω‖ |k|^b`.
    pub kappa: f64,
    /// Where that minimum is attained.
    pub kappa_k: LatticeVector,
    pub b: f64,
    /// The requested constant, if any.
    pub kappa_requested: Option<f64>,
    /// `‖k·ω‖ > κ |k|^{-b}` for every scanned `k`; `None` without a request.
    pub satisfied: Option<bool>,
    /// Flat resonance level `κ K₀^{-b}` implied by the request.
    pub delta: Option<f64>,
}

#[derive(Clone)]
struct ScanAcc {
    worst: (f64, LatticeVector),
    tight: (f64, LatticeVector),
    violated: bool,
}

impl ScanAcc {
    fn merge(self, other: Self) -> Self {
        let pick = |a: (f64, LatticeVector), b: (f64, LatticeVector)| {
            if (b.0, &b.1) < (a.0, &a.1) {
                b
            } else {
                a
            }
        };
        Self {
            worst: pick(self.worst, other.worst),
            tight: pick(self.tight, other.tight),
            violated: self.violated || other.violated,
        }
    }
}

/// Scans every `0 < |k| <= K₀` (one of each `±k` pair).
pub fn diophantine_scan(omega: &Frequency, k0: u64, kappa: Option<f64>, b: f64) -> Result<DiophantineReport> {
    if k0 == 0 {
        return Err(Error::invalid("k0", "K0 must be >= 1"));
    }
    if let Some(k) = kappa {
        if !(k > 0.0) {
            return Err(Error::invalid("kappa", "kappa must be > 0"));
        }
    }
    if !(b >= 0.0) {
        return Err(Error::invalid("b", "b must be >= 0"));
    }
    let d = omega.dim();
    let side = 2.0 * k0 as f64 + 1.0;
    let count = (side.powi(d as i32) - 1.0) / 2.0;
    if count > SCAN_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "diophantine scan",
            requested: count,
            budget: SCAN_BUDGET,
        });
    }
    let w = omega.components().to_vec();
    let k0i = k0 as i64;

    // Slabs by leading component: k_1 > 0 with the rest free, or k_1 = 0
    // and recurse on the remaining coordinates.
    let acc = (1..=k0i)
        .into_par_iter()
        .map(|lead| scan_slab(&w, k0i, vec![lead], kappa, b))
        .chain(
            (1..d)
                .into_par_iter()
                .flat_map(|zeros| {
                    (1..=k0i).into_par_iter().map(move |lead| {
                        let mut prefix = vec![0; zeros];
                        prefix.push(lead);
                        prefix
                    })
                })
                .map(|prefix| scan_slab(&w, k0i, prefix, kappa, b)),
        )
        .reduce_with(ScanAcc::merge)
        .expect("K0 >= 1 gives a nonempty scan");

    Ok(DiophantineReport {
        k0,
        worst_k: acc.worst.1,
        worst_value: acc.worst.0,
        kappa: acc.tight.0,
        kappa_k: acc.tight.1,
        b,
        kappa_requested: kappa,
        satisfied: kappa.map(|_| !acc.violated),
        delta: kappa.map(|k| k * (k0 as f64).powf(-b)),
    })
}

/// All `k` with the given prefix and free trailing components in `[-K₀, K₀]`.
fn scan_slab(w: &[f64], k0: i64, prefix: Vec<i64>, kappa: Option<f64>, b: f64) -> ScanAcc {
    let d = w.len();
    let free = d - prefix.len();
    let side = (2 * k0 + 1) as u64;
    let mut acc: Option<ScanAcc> = None;
    let mut k = prefix.clone();
    k.resize(d, 0);
    for mut idx in 0..side.pow(free as u32) {
        for slot in k[prefix.len()..].iter_mut().rev() {
            *slot = (idx % side) as i64 - k0;
            idx /= side;
        }
        let t: f64 = k.iter().zip(w).map(|(&ki, &wi)| ki as f64 * wi).sum();
        let value = torus_norm(t);
        let norm = k.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as f64;
        let scaled = value * norm.powf(b);
        let violated = kappa.is_some_and(|kap| !(value > kap * norm.powf(-b)));
        let lv = || LatticeVector::new(k.clone());
        acc = Some(match acc {
            None => ScanAcc {
                worst: (value, lv()),
                tight: (scaled, lv()),
                violated,
            },
            Some(mut a) => {
                if value < a.worst.0 {
                    a.worst = (value, lv());
                }
                if scaled < a.tight.0 {
                    a.tight = (scaled, lv());
                }
                a.violated |= violated;
                a
            }
        });
    }
    acc.expect("slabs are nonempty")
}

/// Smallest integer `K₀` with `K₀^{1+b} >= (scale · N^{1/(1+b)})^{1+b}`,
/// i.e. `⌈scale · N^{1/(1+b)}⌉` robust to `powf` rounding.
pub fn k0_for_scale_with(n: u64, b: f64, scale: f64) -> Result<u64> {
    if n < 2 {
        return Err(Error::invalid("N", "need N >= 2"));
    }
    if !(b >= 0.0) || !(scale > 0.0) {
        return Err(Error::invalid("b", "need b >= 0 and a positive scale"));
    }
    let target = scale * (n as f64).powf(1.0 / (1.0 + b));
    Ok(snap_ceil(target))
}

/// `⌈N^{1/(1+b)}⌉`.
pub fn k0_for_scale(n: u64, b: f64) -> Result<u64> {
    k0_for_scale_with(n, b, 1.0)
}

/// `⌈K₀^{1+b}⌉`.
pub fn n_for_k0(k0: u64, b: f64) -> Result<u64> {
    if k0 == 0 || !(b >= 0.0) {
        return Err(Error::invalid("k0", "need K0 >= 1 and b >= 0"));
    }
    Ok(snap_ceil((k0 as f64).powf(1.0 + b)))
}

/// Ceiling that treats values within a few ulps of an integer as that
/// integer, so `100^{1/2}` evaluating to `10.000000000000002` gives 10.
pub(crate) fn snap_ceil(t: f64) -> u64 {
    let r = t.round();
    if (t - r).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
        r as u64
    } else {
        t.ceil() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn golden() -> Frequency {
        Frequency::golden()
    }

    #[test]
    fn torus_norm_examples() {
        assert_eq!(torus_norm(0.5), 0.5);
        assert_eq!(torus_norm(1.25), 0.25);
        assert!((torus_norm(-0.1) - 0.1).abs() < 1e-17);
        assert_eq!(torus_norm(3.0), 0.0);
    }

    #[test]
    fn rational_half_fails() {
        let r = diophantine_scan(&Frequency::new(vec![0.5]).unwrap(), 2, Some(1e-3), 1.0).unwrap();
        assert_eq!(r.satisfied, Some(false));
        assert_eq!(r.worst_k, LatticeVector::from(2));
        assert_eq!(r.worst_value, 0.0);
    }

    #[test]
    fn golden_tightest_kappa() {
        // Oracle: direct loop over k = 1..=100 of k·‖kω‖.
        let w = golden().components()[0];
        let oracle = (1..=100u64)
            .map(|k| {
                let t = k as f64 * w;
                k as f64 * (t - t.floor()).min(t.ceil() - t)
            })
            .fold(f64::INFINITY, f64::min);
        let r = diophantine_scan(&golden(), 100, Some(0.3), 1.0).unwrap();
        assert!((r.kappa - oracle).abs() < 1e-15);
        assert!(r.kappa > 0.38 && r.kappa < 0.45, "{}", r.kappa);
        assert_eq!(r.kappa_k, LatticeVector::from(1));
        assert_eq!(r.satisfied, Some(true));
        assert!(r.kappa <= r.worst_value * (r.worst_k.norm() as f64).powf(1.0));
        let strict = diophantine_scan(&golden(), 100, Some(0.39), 1.0).unwrap();
        assert_eq!(strict.satisfied, Some(false));
    }

    #[test]
    fn two_dimensional_scan_matches_lattice_oracle() {
        let omega = Frequency::new(vec![2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0]).unwrap();
        let (k0, b, kappa) = (50i64, 3.0, 1e-2);
        let w = omega.components();
        let mut min_val = f64::INFINITY;
        let mut min_scaled = f64::INFINITY;
        let mut ok = true;
        for k1 in -k0..=k0 {
            for k2 in -k0..=k0 {
                if k1 == 0 && k2 == 0 {
                    continue;
                }
                let t = k1 as f64 * w[0] + k2 as f64 * w[1];
                let v = (t - t.floor()).min(t.ceil() - t);
                let n = k1.abs().max(k2.abs()) as f64;
                min_val = min_val.min(v);
                min_scaled = min_scaled.min(v * n.powf(b));
                ok &= v > kappa * n.powf(-b);
            }
        }
        let r = diophantine_scan(&omega, k0 as u64, Some(kappa), b).unwrap();
        assert!((r.worst_value - min_val).abs() < 1e-15);
        assert!((r.kappa - min_scaled).abs() < 1e-12);
        assert_eq!(r.satisfied, Some(ok));
        assert!(r.worst_k.norm() > 0 && r.worst_k.norm() <= k0 as u64);
    }

    #[test]
    fn rational_detection() {
        for (om, k0) in [
            (vec![0.25], 4),
            (vec![1.0 / 3.0, 0.5], 6),
            (vec![0.2, 0.4, 0.6], 5),
        ] {
            let r = diophantine_scan(&Frequency::new(om).unwrap(), k0, Some(1e-12), 0.0).unwrap();
            assert_eq!(r.satisfied, Some(false));
        }
    }

    #[test]
    fn scale_couplings() {
        assert_eq!(k0_for_scale(100, 1.0).unwrap(), 10);
        assert_eq!(k0_for_scale(1_000_000, 1.0).unwrap(), 1000);
        assert_eq!(k0_for_scale(101, 1.0).unwrap(), 11);
        assert_eq!(n_for_k0(10, 0.0).unwrap(), 10);
        assert_eq!(n_for_k0(10, 1.0).unwrap(), 100);
        assert!(k0_for_scale(1, 1.0).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let omega = Frequency::new(vec![0.1, 0.2, 0.3]).unwrap();
        assert!(matches!(
            diophantine_scan(&omega, 10_000, None, 1.0),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn three_dimensional_scan_covers_half_lattice() {
        let omega = Frequency::new(vec![0.1234, 0.5678, 0.91011]).unwrap();
        let r = diophantine_scan(&omega, 3, None, 0.0).unwrap();
        let w = omega.components();
        let mut best = f64::INFINITY;
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                for c in -3i64..=3 {
                    if (a, b, c) != (0, 0, 0) {
                        best = best.min(torus_norm(a as f64 * w[0] + b as f64 * w[1] + c as f64 * w[2]));
                    }
                }
            }
        }
        assert_eq!(r.worst_value, best);
        assert_eq!(r.satisfied, None);
    }

    proptest! {
        #[test]
        fn round_trip_covers_n(n in 2u64..2_000_000, b in 0.0f64..3.0) {
            let k0 = k0_for_scale(n, b).unwrap();
            prop_assert!(n_for_k0(k0, b).unwrap() >= n);
            if k0 > 1 {
                // minimality
                prop_assert!(((k0 - 1) as f64).powf(1.0 + b) < n as f64 * (1.0 + 1e-12));
            }
        }

        #[test]
        fn tightest_kappa_nonincreasing_in_k0(w in 0.01f64..0.99, b in 0.0f64..2.0) {
            let omega = Frequency::new(vec![w]).unwrap();
            let mut last = f64::INFINITY;
            for k0 in [1u64, 2, 5, 13, 40, 100] {
                let r = diophantine_scan(&omega, k0, None, b).unwrap();
                prop_assert!(r.kappa <= last);
                last = r.kappa;
            }
        }

        #[test]
        fn symmetric_pairs_agree(w in -3.0f64..3.0, k in 1i64..10_000) {
            prop_assert_eq!(torus_norm(k as f64 * w), torus_norm(-(k as f64) * w));
        }
    }
}
