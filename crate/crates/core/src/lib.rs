//! Tensor complementarity problems `TCP(A, a)`:
//! find `x >= 0` with `A x^(m-1) + a >= 0` and `<x, A x^(m-1) + a> = 0`.
//!
//! * [`tensor`]: dense order-`m`, dimension-`n` tensors and contractions.
//! * [`model`]: instances, residuals, the KKT system and pseudo-faces.
//! * [`solver`]: the pseudo-face multistart Newton solver.
//! * [`oracle`]: an independent grid brute-force solver used for cross-checks.
//! * [`properties`]: R0, copositivity, monotonicity and GUS checks.
//! * [`lab`]: seeded perturbation experiments on the solution map.
//! * [`catalog`]: built-in instances with closed-form solution tables.
//! * [`io`]: JSON and CSV formats.

// Negated float comparisons are used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod io;
pub mod lab;
pub mod model;
pub mod newton;
pub mod oracle;
pub mod properties;
pub mod rng;
pub mod solver;
pub mod tensor;

pub use error::{Result, TcpError};
pub use model::{FaceMask, KktPoint, TcpInstance};
pub use solver::{SolutionSet, SolverConfig, Status};
pub use tensor::Tensor;
