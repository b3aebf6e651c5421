//! Experiment drivers: convergence tables, decay fits, eigenvalue estimates,
//! CSV output and the command-line front end.

pub mod cli;
mod convergence;
mod decay;
pub mod output;

pub use cli::cli_main;
pub use convergence::{compute_rates, convergence_study, ConvergenceRow, DtRule, StudyOptions};
pub use decay::{decay_study, fit_log_slope, DecayFit, LineFit, MIN_FIT_SAMPLES};

use std::sync::Arc;

use crate::assembly::assemble;
use crate::error::Result;
use crate::mesh::Mesh;

/// Discrete first Dirichlet eigenvalue on the uniform mesh of `level`.
pub fn discrete_eigenvalue(level: u32, tol: f64) -> Result<f64> {
    let sys = assemble(Arc::new(Mesh::uniform(level)?))?;
    sys.smallest_eigenvalue(tol)
}
