use thiserror::Error;

use crate::fourier::LatticeVector;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series has empty support")]
    EmptySeries,

    #[error("no finite Gevrey constant: |coefficient({k})| = {amplitude} >= 1")]
    NoFiniteConstant { k: LatticeVector, amplitude: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cocycle is not unimodular: max |det - 1| = {deviation:e} exceeds {tolerance:e}")]
    NotUnimodular { deviation: f64, tolerance: f64 },

    #[error("non-finite value encountered at iteration step {step}")]
    NonFinite { step: usize },

    #[error("budget exceeded: {what} requires {requested} entries, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        requested: f64,
        budget: f64,
    },

    #[error("Gevrey exponent s = {s} is outside the admissible range s < {limit}")]
    RangeViolation { s: f64, limit: f64 },

    #[error(
        "frequency fails the Diophantine condition at K0 = {k0}: worst resonance k = {worst_k}, |k.omega| = {worst_value:e}"
    )]
    DiophantineFailure {
        k0: u64,
        worst_k: LatticeVector,
        worst_value: f64,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
