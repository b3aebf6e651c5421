//! Time integrators for u_t − (1 + ‖∇u‖²) Δu = f.
//!
//! Both schemes solve `(M + k μ A) U = M U_prev + k F(t_n)` at each step.
//! The fully implicit scheme needs μ = 1 + UᵀAU, which is found by a
//! bracketed scalar root-find on g(μ) = 1 + ‖∇U(μ)‖² − μ. The map
//! μ ↦ ‖∇U(μ)‖² is nonincreasing, so g is strictly decreasing with a single
//! root in [1, 1 + ‖∇U(1)‖²]. The modified scheme lags the coefficient,
//! μ = 1 + ‖∇U_prev‖², and needs one linear solve.

mod run;
mod step;

pub use run::{check_stability, run_simulation, InitialState, Simulation, StabilityReport, TimeSeriesRecord};
pub use step::{be_step, be_step_with_guess, mbe_step, RootBracket, StepResult};

use serde::{Deserialize, Serialize};

use crate::error::{FemError, Result};

/// Relative slack allowed when checking the discrete energy inequalities.
pub const DIAGNOSTIC_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeKind {
    #[serde(rename = "be")]
    BackwardEuler,
    #[serde(rename = "mbe")]
    ModifiedBackwardEuler,
}

impl SchemeKind {
    pub fn short_name(self) -> &'static str {
        match self {
            SchemeKind::BackwardEuler => "be",
            SchemeKind::ModifiedBackwardEuler => "mbe",
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = FemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "be" => Ok(SchemeKind::BackwardEuler),
            "mbe" => Ok(SchemeKind::ModifiedBackwardEuler),
            other => Err(FemError::InvalidConfig(format!("unknown scheme `{other}` (expected be|mbe)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Time step k.
    pub dt: f64,
    pub t_end: f64,
    /// Bound on |g(μ)| for the backward Euler root-find.
    pub nonlinear_tol: f64,
    /// Relative residual for CG.
    pub linear_tol: f64,
    pub max_root_iters: usize,
    pub max_steps: usize,
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind, dt: f64, t_end: f64) -> Self {
        SchemeConfig {
            kind,
            dt,
            t_end,
            nonlinear_tol: 1e-10,
            linear_tol: 1e-10,
            max_root_iters: 200,
            max_steps: 10_000_000,
        }
    }

    pub fn num_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FemError::InvalidConfig(msg));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("time step must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite()) || self.dt > self.t_end * (1.0 + 1e-12) {
            return bad(format!("t_end ({}) must be at least dt ({})", self.t_end, self.dt));
        }
        if !(self.nonlinear_tol > 0.0) || !(self.linear_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.num_steps() > self.max_steps {
            return bad(format!("{} steps exceed the cap of {}", self.num_steps(), self.max_steps));
        }
        Ok(())
    }
}

/// Largest k₀ with 1 + λ₁k/2 > e^{αk} for all k in (0, k₀).
///
/// Returns `None` when α ≥ λ₁/2 (no such step exists) and infinity when α ≤ 0.
pub fn max_step_for_decay_rate(lambda1: f64, alpha: f64) -> Option<f64> {
    if alpha <= 0.0 {
        return Some(f64::INFINITY);
    }
    if alpha >= lambda1 / 2.0 {
        return None;
    }
    let h = |k: f64| 1.0 + lambda1 * k / 2.0 - (alpha * k).exp();
    let mut hi = 1.0 / alpha;
    while h(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Some(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let ok = SchemeConfig::new(SchemeKind::BackwardEuler, 0.01, 1.0);
        assert!(ok.validate().is_ok());
        assert_eq!(ok.num_steps(), 100);
        assert!(SchemeConfig::new(SchemeKind::BackwardEuler, 0.001, 0.0).validate().is_err());
        assert!(SchemeConfig::new(SchemeKind::BackwardEuler, -0.1, 1.0).validate().is_err());
        assert!(SchemeConfig::new(SchemeKind::BackwardEuler, 0.5, 0.5).validate().is_ok());
        let mut capped = ok;
        capped.max_steps = 10;
        assert!(capped.validate().is_err());
    }

    #[test]
    fn scheme_names() {
        assert_eq!("be".parse::<SchemeKind>().unwrap(), SchemeKind::BackwardEuler);
        assert_eq!("mbe".parse::<SchemeKind>().unwrap(), SchemeKind::ModifiedBackwardEuler);
        assert!("cn".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn decay_step_restriction() {
        let lambda = 2.0 * std::f64::consts::PI.powi(2);
        let k0 = max_step_for_decay_rate(lambda, 5.0).unwrap();
        assert!(k0 > 0.0 && k0.is_finite());
        let h = |k: f64| 1.0 + lambda * k / 2.0 - (5.0 * k).exp();
        assert!(h(0.5 * k0) > 0.0);
        assert!(h(k0 * (1.0 + 1e-9)) < 0.0);
        assert!(max_step_for_decay_rate(lambda, lambda / 2.0).is_none());
        assert_eq!(max_step_for_decay_rate(lambda, 0.0), Some(f64::INFINITY));
    }
}
