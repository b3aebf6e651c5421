//! P1 finite element machinery on a [`Mesh`](crate::mesh::Mesh).

mod element;
mod field;
mod norms;
mod operators;
mod quadrature;
mod system;

pub use element::{barycentric_gradients, element_matrices, ElementMatrices};
pub use field::NodalField;
pub use norms::{
    error_norms, h1_error, h1_full_error, h1_seminorm_sq, l2_error, l2_norm_of_function, l2_norm_sq,
    ErrorNorms,
};
pub use operators::{apply_discrete_laplacian, ritz_projection, LAPLACIAN_MASS_TOL};
pub use quadrature::QuadratureRule;
pub use system::{assemble, assemble_full, load_vector, FemSystem};
