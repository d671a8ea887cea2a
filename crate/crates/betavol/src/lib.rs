//! Verification laboratory for matrix polar coordinates over the three
//! classical fields.
//!
//! The crate evaluates closed-form moments of determinant-like statistics of
//! random matrices and point sets over ℝ, ℂ, and ℍ (β = 1, 2, 4), re-derives
//! the same quantities by seeded Monte Carlo from first principles, and
//! compares the two routes with z-scores. Modules:
//!
//! * [`numfield`] — β-indexed scalar arithmetic (quaternions as complex pairs).
//! * [`betalinalg`] — F_β matrices: Gram–Schmidt QR, polar factorization,
//!   PSD square roots, β-collapsed spectra.
//! * [`samplers`] — seeded, stream-addressed samplers: Gaussian matrices,
//!   ball/sphere point sets, Haar frames, induced ensembles, product chains.
//! * [`closedform`] — exact evaluators for volumes and determinant moments.
//! * [`mcverify`] — estimators, z-score comparison, and the check suite.

pub mod betalinalg;
pub mod closedform;
pub mod error;
pub mod mcverify;
pub mod numfield;
pub mod samplers;
pub mod special;

pub use error::{Error, Result};
