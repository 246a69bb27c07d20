//! Dissipative Lipkin-Meshkov-Glick model: exact finite-size spectra and
//! thermodynamics, the bosonized effective oscillator, reservoir-induced
//! rates in the conventional and polaron frames, and waiting-time
//! distributions of the resulting emission/absorption process.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bosonic;
pub mod dissipation;
pub mod error;
pub mod model;
pub mod parallel;
pub mod quadrature;
pub mod spin;
pub mod tridiagonal;
pub mod waiting_times;

pub use error::{Error, Result};
pub use model::{classify_phase, BathParams, LmgParams, Phase};
pub use parallel::Execution;
