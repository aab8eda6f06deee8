//! Precompiled evaluators for the hot loops (orbit products, grid sweeps).

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{cis_turns, FourierSeries};

/// Above this value of `2π |y| · span` Horner on the dense layout risks
/// overflow and the sparse path is used instead.
const DENSE_GROWTH_LIMIT: f64 = 600.0;

#[derive(Debug, Clone)]
pub(crate) enum Kernel {
    Zero,
    Constant(Complex64),
    /// `d = 1`, coefficients for `kmin..=kmin + len - 1`.
    Dense1 {
        kmin: i64,
        coeffs: Vec<Complex64>,
    },
    Sparse {
        terms: Vec<(Vec<f64>, Complex64)>,
    },
}

impl Kernel {
    pub(crate) fn compile(series: &FourierSeries) -> Self {
        if series.is_empty() {
            return Kernel::Zero;
        }
        if series.is_constant() {
            let (_, a) = series.iter().next().expect("nonempty");
            return Kernel::Constant(*a);
        }
        if series.dim() == 1 {
            let kmin = series.iter().next().expect("nonempty").0.components()[0];
            let kmax = series.iter().last().expect("nonempty").0.components()[0];
            let span = (kmax - kmin + 1) as usize;
            if span <= 4 * series.len() + 64 {
                let mut coeffs = vec![Complex64::new(0.0, 0.0); span];
                for (k, a) in series.iter() {
                    coeffs[(k.components()[0] - kmin) as usize] = *a;
                }
                return Kernel::Dense1 { kmin, coeffs };
            }
        }
        Kernel::Sparse {
            terms: series
                .iter()
                .map(|(k, a)| (k.components().iter().map(|&c| c as f64).collect(), *a))
                .collect(),
        }
    }

    pub(crate) fn is_constant(&self) -> bool {
        matches!(self, Kernel::Zero | Kernel::Constant(_))
    }

    /// Evaluates at `x + i y` (`y = None` means the real torus).
    #[inline]
    pub(crate) fn eval(&self, x: &[f64], y: Option<&[f64]>) -> Complex64 {
        self.eval_shared(x, y, &mut None)
    }

    /// As [`Kernel::eval`]; `base` caches `exp(2πi z)` between the entries
    /// of one matrix evaluated at the same point.
    #[inline]
    pub(crate) fn eval_shared(
        &self,
        x: &[f64],
        y: Option<&[f64]>,
        base: &mut Option<Complex64>,
    ) -> Complex64 {
        match self {
            Kernel::Zero => Complex64::new(0.0, 0.0),
            Kernel::Constant(a) => *a,
            Kernel::Dense1 { kmin, coeffs } => {
                let yy = y.map_or(0.0, |y| y[0]);
                let span = coeffs.len() as f64;
                if TAU * yy.abs() * span > DENSE_GROWTH_LIMIT {
                    return sparse_dense1(*kmin, coeffs, x[0], yy);
                }
                let z = *base.get_or_insert_with(|| {
                    let b = cis_turns(x[0]);
                    if yy != 0.0 {
                        b * (-TAU * yy).exp()
                    } else {
                        b
                    }
                });
                let mut acc = Complex64::new(0.0, 0.0);
                for c in coeffs.iter().rev() {
                    acc = acc * z + c;
                }
                let lead = match *kmin {
                    0 => Complex64::new(1.0, 0.0),
                    k if k.unsigned_abs() <= SHORT_LEAD => z.powi(k as i32),
                    k => cis_turns(k as f64 * x[0]) * (-TAU * k as f64 * yy).exp(),
                };
                acc * lead
            }
            Kernel::Sparse { terms } => terms
                .iter()
                .map(|(k, a)| {
                    let kx: f64 = k.iter().zip(x).map(|(k, x)| k * x).sum();
                    let growth = match y {
                        Some(y) => (-TAU * k.iter().zip(y).map(|(k, y)| k * y).sum::<f64>()).exp(),
                        None => 1.0,
                    };
                    a * cis_turns(kx) * growth
                })
                .sum(),
        }
    }
}

/// Leading powers `base^kmin` up to this order come from `powi`.
const SHORT_LEAD: u64 = 8;

fn sparse_dense1(kmin: i64, coeffs: &[Complex64], x: f64, y: f64) -> Complex64 {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(j, c)| {
            let k = (kmin + j as i64) as f64;
            c * cis_turns(k * x) * (-TAU * k * y).exp()
        })
        .sum()
}
