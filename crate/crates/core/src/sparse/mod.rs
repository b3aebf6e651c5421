//! Compressed-row sparse matrices and the iterative solvers built on them.

mod cg;
mod csr;
mod eigen;

pub use cg::{cg_solve, cg_solve_into, CgOptions, Preconditioner, SolveReport};
pub use csr::CsrMatrix;
pub use eigen::{inverse_power_iteration, smallest_generalized_eigenvalue, EigenPair};

/// Euclidean inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
