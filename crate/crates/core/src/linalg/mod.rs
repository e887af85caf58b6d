//! Dense linear algebra: matrices, the element-wise Jacobi kernel, pivoted QR
//! and singular value estimates.

mod eigen;
mod matrix;
mod norms;
mod qr;
pub mod random;
mod symmetric;

use thiserror::Error;

pub use eigen::{
    apply_rotation, jacobi_eigensolve, rotation_for, row_cyclic_sweep, EigenOrdering, EigenResult, GivensRotation,
};
pub use matrix::Matrix;
pub use norms::{sigma_min, spectral_norm, spectral_radius};
pub use qr::{qr_column_pivoting, PivotedQr};
pub use symmetric::{off_norm, SymmetricMatrix};

/// Default relative tolerance of the Jacobi kernel.
pub const KERNEL_TOL: f64 = 1e-13;
/// Default relative tolerance of the norm estimators.
pub const NORM_TOL: f64 = 1e-10;

/// Errors raised by the dense linear algebra layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: entries ({row}, {col}) and ({col}, {row}) differ by {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("no convergence after {sweeps} sweeps (off-norm {off_norm:e})")]
    NonConvergence { sweeps: usize, off_norm: f64 },
}
