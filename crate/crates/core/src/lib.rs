//! Numerical verification of multivariate trace inequalities.
//!
//! The crate evaluates both sides of the Golden-Thompson inequality, Lieb's
//! three-matrix inequality, the n-matrix inequality with complex powers averaged
//! against the density `β(t) = (π/2)(1 + cosh πt)^{-1}`, and its equivalent
//! resolvent form built from maximally entangled projectors, and checks every
//! identity that links them on seeded random positive definite matrices.

pub mod campaign;
pub mod combinatorics;
pub mod entangle;
pub mod error;
pub mod frechet;
pub mod inequalities;
pub mod linalg;
pub mod quadrature;
pub mod report;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, PosDefMatrix, SpectralDecomposition};
pub use quadrature::{QuadratureConfig, QuadratureRule};
pub use report::TrialReport;

/// Largest total tensor dimension any check will build.
pub const DIMENSION_CAP: usize = 512;
