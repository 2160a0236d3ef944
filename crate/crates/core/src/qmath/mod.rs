//! Exact small-dimension complex linear algebra for a single qubit: 2×2
//! operators, validated density matrices, Bloch coordinates, trace distance,
//! and 4×4 superoperators with their Choi representation.
//!
//! Vectorization is column-stacking throughout the crate:
//! `vec(X)[r + 2c] = X[r][c]`.

pub mod eigen;
mod mat2;
mod superop;

pub use mat2::{trace_distance, BlochVector, DensityMatrix, Mat2};
pub use superop::{kron, Superoperator};

use thiserror::Error;

/// Numerical tolerances shared by invariant checks across the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max-entry distance between a density matrix and its adjoint.
    pub hermitian: f64,
    /// Deviation of a density matrix trace from one.
    pub trace: f64,
    /// Most negative eigenvalue accepted for a density matrix.
    pub positivity: f64,
    /// Generic invariant tolerance (trace preservation, completeness).
    pub invariant: f64,
    /// Most negative Choi eigenvalue accepted as completely positive.
    pub complete_positivity: f64,
    /// Relative smallest-singular-value threshold for treating a map as singular.
    pub singular_relative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-12,
            trace: 1e-12,
            positivity: 1e-12,
            invariant: 1e-10,
            complete_positivity: 1e-8,
            singular_relative: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum QmathError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (max |m - m†| = {0:.3e})")]
    NotHermitian(f64),
    #[error("density matrix trace is {0}, expected 1")]
    TraceNotOne(f64),
    #[error("density matrix is not positive (min eigenvalue {0:.3e})")]
    NotPositive(f64),
}
