//! Finite element machinery for the nonlocal Kirchhoff parabolic equation
//!
//! ```text
//! u_t - (1 + ||grad u||^2) Δu = f   in Ω × (0, T]
//! u = 0                              on ∂Ω
//! u(0) = u0
//! ```
//!
//! The crate is split into:
//!
//! - [`mesh`]: triangulations of the unit square and a plain-text mesh loader
//! - [`sparse`]: CSR matrices, preconditioned CG and inverse power iteration
//! - [`assembly`]: P1 mass/stiffness assembly, load vectors, norms, the
//!   discrete Laplacian and the Ritz projection
//! - [`schemes`]: backward Euler (nonlinear, solved through a scalar
//!   root-find on the nonlocal coefficient) and the linearized variant
//! - [`problems`]: manufactured-solution test problems
//! - [`harness`]: convergence and decay studies, CSV output, and the CLI

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod problems;
pub mod schemes;
pub mod sparse;

pub use error::{FemError, Result};
