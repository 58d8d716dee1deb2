//! Pseudo-spectral solver for quaternion-valued incompressible flow on a
//! periodic torus, together with a Littlewood-Paley / Besov analysis toolkit.
//!
//! The crate is organized around a small number of layers:
//!
//! * [`quat`] — exact Hamilton quaternion algebra, used pointwise.
//! * [`grid`] / [`field`] — periodic grids and quaternion-valued fields with
//!   Fourier transforms, spectral derivatives, Leray projection and
//!   two-thirds dealiasing.
//! * [`lp`] — a discrete Littlewood-Paley filter bank: the annulus bump,
//!   dyadic band projections and reconstruction.
//! * [`besov`] — Besov norms over band decompositions plus empirical
//!   embedding and product-estimate checks.
//! * [`solver`] — mild-solution time stepping (exact heat semigroup,
//!   dealiased quaternionic nonlinearity, Duhamel predictor-corrector) and a
//!   Picard fixed-point mode.
//! * [`diagnostics`] — frequency-banded energy accounting, dissipation
//!   scaling fits, Gronwall envelope monitoring and energy-balance residuals.
//! * [`synth`] — deterministic initial-condition builders (Taylor-Green,
//!   seeded broadband fields, single modes).

// Index loops over parallel component/axis arrays read better than zips in
// the dimension-generic spectral kernels.
#![allow(clippy::needless_range_loop)]

pub mod besov;
pub mod diagnostics;
pub mod error;
mod fft;
pub mod field;
pub mod grid;
pub mod lp;
pub mod quat;
pub mod solver;
pub mod synth;

pub use besov::BesovParams;
pub use diagnostics::DiagnosticsRecord;
pub use error::{Error, Result};
pub use field::{QField, Repr};
pub use grid::GridSpec;
pub use lp::{BandDecomposition, FilterBank};
pub use quat::Quaternion;
pub use solver::{ForcingSpec, NonlinearityMode, SimConfig, SolverState};
