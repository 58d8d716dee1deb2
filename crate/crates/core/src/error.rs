//! Error types shared across the crate.

use thiserror::Error;

use crate::field::Repr;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by grid validation, field operations, analysis and the
/// solver. Blow-up is an error variant because it aborts a computation, but
/// callers of the simulation loop receive it as a reportable outcome.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("expected {expected:?} representation, got {found:?}")]
    Representation { expected: Repr, found: Repr },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Spectral data claimed to describe a real field but violated
    /// Hermitian symmetry beyond tolerance.
    #[error("Hermitian symmetry violated: relative deviation {max_violation:.3e} exceeds {tolerance:.1e}")]
    HermitianSymmetry { max_violation: f64, tolerance: f64 },

    #[error("band {j} outside filter bank range [{j_min}, {j_max}]")]
    BandOutOfRange { j: i32, j_min: i32, j_max: i32 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The numerical solution lost finiteness (or exceeded the energy guard).
    /// Carries the failing step and the last finite Besov norm seen before
    /// the failure; this is a meaningful outcome, not a defect.
    #[error("blow-up at step {step_index} (last finite Besov norm {last_besov:.6e})")]
    BlowUp { step_index: usize, last_besov: f64 },
}

impl Error {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
