//! Additive sweeping preconditioner for the Helmholtz equation with perfectly matched layers.
//!
//! The unit box is discretized by second-order finite differences, the sweep axis is cut into
//! slabs, and each slab carries three PML-padded subproblems whose factorizations combine into a
//! preconditioner for restarted GMRES.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod assemble;
pub mod calibration;
pub mod dense;
pub mod error;
pub mod grid;
pub mod krylov;
pub mod partition;
pub mod pml;
pub mod scenario;
pub mod solve;
pub mod sparse;
pub mod sweep;
pub mod vecops;
pub mod velocity;

pub use num_complex::Complex64;

pub use assemble::{assemble_global, assemble_subproblem, boundary_rhs, global_profiles, symmetrize, Scaling, Side};
pub use dense::{dense_solve_oracle, DenseMatrix, DENSE_ORACLE_LIMIT};
pub use error::{Error, Result};
pub use grid::{GridSpec, PmlSides};
pub use krylov::{gmres_solve, operator_residual, GmresConfig, SolveReport};
pub use partition::{partition_layers, ExtendedRange, Kind, LayerPartition, Pad};
pub use pml::{PmlProfile, PmlStrength, Ramp};
pub use solve::{Factorization, FrontMode, SolverKind};
pub use sparse::{FnOperator, Identity, LinearOperator, Ordering, Permutation, SparseOperator};
pub use sweep::{extract_trace, AuxiliaryGreens, SubproblemResidual, SweepConfig, SweepPreconditioner};
pub use velocity::VelocityField;
pub use scenario::{make_force, make_velocity, Force, Medium, ScenarioSpec};
