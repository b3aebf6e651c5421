use std::ops::RangeInclusive;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{error_norms, QuadratureRule};
use crate::error::{FemError, Result};
use crate::mesh::{uniform_spacing, Mesh};
use crate::problems::ProblemSpec;
use crate::schemes::{run_simulation, SchemeConfig, SchemeKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DtRule {
    /// k = h²
    HSquared,
    /// k = c·h²
    ScaledHSquared(f64),
    /// same k on every level
    Fixed(f64),
}

impl DtRule {
    pub fn step_for(self, h: f64) -> f64 {
        match self {
            DtRule::HSquared => h * h,
            DtRule::ScaledHSquared(c) => c * h * h,
            DtRule::Fixed(k) => k,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StudyOptions {
    pub t_end: f64,
    pub linear_tol: f64,
    pub nonlinear_tol: f64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions { t_end: 1.0, linear_tol: 1e-10, nonlinear_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub level: u32,
    /// mesh parameter 1/n
    pub h: f64,
    pub dt: f64,
    pub l2_error: f64,
    pub l2_rate: Option<f64>,
    /// H¹ seminorm error
    pub h1_error: f64,
    pub h1_rate: Option<f64>,
    /// full H¹ norm error, reported but not used for rates
    pub h1_full_error: f64,
}

/// Fills the rate columns with log₂ of consecutive error ratios.
pub fn compute_rates(rows: &mut [ConvergenceRow]) {
    let mut prev: Option<(f64, f64)> = None;
    for row in rows.iter_mut() {
        let (l2_rate, h1_rate) = match prev {
            Some((l2, h1)) => (Some((l2 / row.l2_error).log2()), Some((h1 / row.h1_error).log2())),
            None => (None, None),
        };
        row.l2_rate = l2_rate;
        row.h1_rate = h1_rate;
        prev = Some((row.l2_error, row.h1_error));
    }
}

/// Runs the problem to `opts.t_end` on every level and measures errors there.
pub fn convergence_study(
    problem: &ProblemSpec,
    levels: RangeInclusive<u32>,
    scheme: SchemeKind,
    dt_rule: DtRule,
    opts: &StudyOptions,
) -> Result<Vec<ConvergenceRow>> {
    let (Some(exact_u), Some(exact_grad)) = (problem.exact_u, problem.exact_grad) else {
        return Err(FemError::NoExactSolution(problem.name.to_string()));
    };
    if levels.is_empty() {
        return Err(FemError::InvalidConfig("empty level range".into()));
    }
    let rule = QuadratureRule::dunavant4();

    let mut rows = levels
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|level| -> Result<ConvergenceRow> {
            let h = uniform_spacing(level);
            let dt = dt_rule.step_for(h);
            let mut cfg = SchemeConfig::new(scheme, dt, opts.t_end);
            cfg.linear_tol = opts.linear_tol;
            cfg.nonlinear_tol = opts.nonlinear_tol;
            let sim = run_simulation(problem, Arc::new(Mesh::uniform(level)?), &cfg)?;
            let t_final = cfg.num_steps() as f64 * dt;
            let err = error_norms(exact_u, exact_grad, &sim.final_field, t_final, &rule)?;
            log::info!("level {level}: h = {h}, k = {dt:e}, L2 = {:e}, H1 = {:e}", err.l2, err.h1_semi);
            Ok(ConvergenceRow {
                level,
                h,
                dt,
                l2_error: err.l2,
                l2_rate: None,
                h1_error: err.h1_semi,
                h1_rate: None,
                h1_full_error: err.h1_full,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    compute_rates(&mut rows);
    Ok(rows)
}
