use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FemError, Result};
use crate::mesh::Mesh;
use crate::problems::ProblemSpec;
use crate::schemes::{run_simulation, SchemeConfig, SchemeKind, Simulation};

pub const MIN_FIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// root-mean-square residual of the fit
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub t_window: (f64, f64),
    pub samples: usize,
    /// slope of log‖U^n‖ against t
    pub slope: f64,
    /// slope of log‖∇U^n‖ against t
    pub slope_h1: f64,
    pub residual: f64,
    pub residual_h1: f64,
}

/// Least-squares line through (t, ln v).
pub fn fit_log_slope(ts: &[f64], values: &[f64]) -> Result<LineFit> {
    if ts.len() != values.len() || ts.len() < 2 {
        return Err(FemError::DegenerateFit(format!("need matching samples, got {} and {}", ts.len(), values.len())));
    }
    if let Some(v) = values.iter().find(|&&v| !(v > 0.0) || !v.is_finite()) {
        return Err(FemError::DegenerateFit(format!("cannot take the log of {v}")));
    }
    let n = ts.len() as f64;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mean_t = ts.iter().sum::<f64>() / n;
    let mean_y = logs.iter().sum::<f64>() / n;
    let sxx: f64 = ts.iter().map(|t| (t - mean_t).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(FemError::DegenerateFit("all samples at the same time".into()));
    }
    let sxy: f64 = ts.iter().zip(&logs).map(|(t, y)| (t - mean_t) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_t;
    let ss: f64 = ts.iter().zip(&logs).map(|(t, y)| (y - intercept - slope * t).powi(2)).sum();
    Ok(LineFit { slope, intercept, residual: (ss / n).sqrt() })
}

/// Runs a simulation and fits exponential decay rates of ‖U^n‖ and ‖∇U^n‖.
///
/// Without an explicit window the fit uses the latter half of [0, t_end].
pub fn decay_study(
    problem: &ProblemSpec,
    level: u32,
    scheme: SchemeKind,
    dt: f64,
    t_end: f64,
    window: Option<(f64, f64)>,
) -> Result<(Simulation, DecayFit)> {
    if !(t_end >= 20.0 * dt) {
        return Err(FemError::InvalidConfig(format!(
            "decay study needs t_end >= 20 dt (t_end = {t_end}, dt = {dt})"
        )));
    }
    let cfg = SchemeConfig::new(scheme, dt, t_end);
    let sim = run_simulation(problem, Arc::new(Mesh::uniform(level)?), &cfg)?;
    let fit = fit_series(&sim, window.unwrap_or((0.5 * t_end, t_end)))?;
    Ok((sim, fit))
}

fn fit_series(sim: &Simulation, (from, to): (f64, f64)) -> Result<DecayFit> {
    let eps = 1e-9 * to.abs().max(1.0);
    let picked: Vec<_> = sim.series.iter().filter(|r| r.t >= from - eps && r.t <= to + eps).collect();
    if picked.len() < MIN_FIT_SAMPLES {
        return Err(FemError::DegenerateFit(format!(
            "window [{from}, {to}] holds {} samples, need at least {MIN_FIT_SAMPLES}",
            picked.len()
        )));
    }
    let ts: Vec<f64> = picked.iter().map(|r| r.t).collect();
    let l2: Vec<f64> = picked.iter().map(|r| r.l2_norm).collect();
    let h1: Vec<f64> = picked.iter().map(|r| r.h1_seminorm).collect();
    if l2.iter().chain(&h1).all(|&v| v == 0.0) {
        return Err(FemError::DegenerateFit("solution norms vanish identically".into()));
    }
    let a = fit_log_slope(&ts, &l2)?;
    let b = fit_log_slope(&ts, &h1)?;
    Ok(DecayFit {
        t_window: (from, to),
        samples: ts.len(),
        slope: a.slope,
        slope_h1: b.slope,
        residual: a.residual,
        residual_h1: b.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::zero_forcing;

    #[test]
    fn exact_exponential_fit() {
        let ts: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let vs: Vec<f64> = ts.iter().map(|t| 3.0 * (-2.5 * t).exp()).collect();
        let fit = fit_log_slope(&ts, &vs).unwrap();
        assert!((fit.slope + 2.5).abs() < 1e-12);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn zero_solution_is_degenerate() {
        let p = ProblemSpec {
            name: "zero",
            u0: |_, _| 0.0,
            f: zero_forcing,
            exact_u: None,
            exact_grad: None,
            grad_energy: None,
        };
        let err = decay_study(&p, 1, SchemeKind::BackwardEuler, 0.01, 0.5, None).unwrap_err();
        assert!(matches!(err, FemError::DegenerateFit(_)));
    }

    #[test]
    fn short_runs_rejected() {
        let p = crate::problems::example3();
        assert!(matches!(
            decay_study(&p, 1, SchemeKind::BackwardEuler, 0.01, 0.1, None),
            Err(FemError::InvalidConfig(_))
        ));
    }
}
