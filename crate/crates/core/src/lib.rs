//! Block Jacobi eigenvalue methods for symmetric matrices under generalized
//! serial and quasi-cyclic pivot strategies.
//!
//! The crate is organized bottom-up:
//!
//! * [`linalg`]: dense matrices, the element-wise Jacobi kernel, pivoted QR and norms.
//! * [`partition`]: block partitions, block views, `vec_π` and the pivot maps.
//! * [`orderings`]: pivot sequences, equivalence relations and strategy classes.
//! * [`annihilator`]: the annihilators `R_ij(Û)` and operators `J_O` on `vec_π`.
//! * [`block_jacobi`]: the block Jacobi driver with UBC enforcement and tracing.
//! * [`bounds`]: the contraction constants `γ`, `ζ`, `η` and `μ`.
//! * [`jjacobi`]: the full block J-Jacobi method for positive definite pencils.

// Parameter checks are written as `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod annihilator;
pub mod block_jacobi;
pub mod bounds;
pub mod jjacobi;
pub mod linalg;
pub mod orderings;
pub mod partition;

pub use annihilator::{Annihilator, AnnihilatorError, OperatorProduct};
pub use block_jacobi::{solve, BlockJacobiError, BlockJacobiResult, SolverConfig, UbcMode};
pub use bounds::{BoundConstants, BoundsError, Contraction};
pub use jjacobi::{jjacobi_solve, JJacobiError, JJacobiResult, JSignature};
pub use linalg::{EigenOrdering, LinalgError, Matrix, SymmetricMatrix};
pub use orderings::{BlockPermutation, ClassKind, OrderingError, PivotSequence};
pub use partition::{BlockIndex, ElementaryBlockMatrix, Partition, PartitionError, VecImage};
