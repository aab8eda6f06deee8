//! Numerical laboratory for quasi-periodic `SL(2,C)` cocycles with Gevrey
//! entries: Fourier truncation, finite-scale Lyapunov exponents, Diophantine
//! scans, large-deviation experiments and continuity sweeps.

// `!(x > 0.0)` style checks are how NaN gets rejected alongside bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arithmetic;
pub mod cocycle;
pub mod error;
pub mod experiment;
pub mod fourier;
pub mod ldt;
pub mod linalg;
pub mod sampling;
pub mod scheme;

pub use arithmetic::{diophantine_scan, k0_for_scale, n_for_k0, torus_norm, DiophantineReport};
pub use cocycle::{Cocycle, Frequency, IterateResult};
pub use error::{Error, Result};
pub use fourier::{
    gevrey_constant, gevrey_distance, sup_error_nominal, FourierSeries, GevreyCertificate, LatticeVector,
    StripPoint,
};
pub use ldt::{ContinuityRecord, LdtRecord};
pub use sampling::SamplerSpec;
pub use scheme::{SchemeAudit, SchemeParams};
