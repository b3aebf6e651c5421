use log::trace;

use super::{SchemeConfig, SchemeKind};
use crate::assembly::{load_vector, FemSystem, NodalField, QuadratureRule};
use crate::error::{FemError, Result};
use crate::sparse::{cg_solve_into, CgOptions, CsrMatrix, SolveReport};

/// Final root bracket of the backward Euler coefficient search.
///
/// `g_lo >= 0 >= g_hi` and `phi_lo >= phi_hi` (up to tolerance) hold for
/// every accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub g_lo: f64,
    pub g_hi: f64,
    pub phi_lo: f64,
    pub phi_hi: f64,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    /// U^n
    pub field: NodalField,
    /// Nonlocal coefficient used in the step.
    pub mu: f64,
    /// Number of frozen-coefficient linear solves.
    pub nonlinear_iters: usize,
    /// Report of the last linear solve.
    pub linear_report: SolveReport,
    /// Present for backward Euler steps that needed a bracket search.
    pub bracket: Option<RootBracket>,
}

/// Linear solves with frozen coefficient: U(μ) = (M + kμA)⁻¹ rhs.
struct FrozenSolver<'a> {
    sys: &'a FemSystem,
    rhs: Vec<f64>,
    k: f64,
    opts: CgOptions,
    /// last iterate, reused as the next initial guess
    guess: Vec<f64>,
    last_report: Option<SolveReport>,
    solves: usize,
}

impl<'a> FrozenSolver<'a> {
    fn new(sys: &'a FemSystem, prev: &[f64], load: &[f64], cfg: &SchemeConfig) -> Result<Self> {
        let k = cfg.dt;
        let m_prev = sys.mass().mul_vec(prev)?;
        let rhs = m_prev.iter().zip(load).map(|(a, b)| a + k * b).collect();
        Ok(FrozenSolver {
            sys,
            rhs,
            k,
            opts: CgOptions::with_tol(cfg.linear_tol),
            guess: prev.to_vec(),
            last_report: None,
            solves: 0,
        })
    }

    fn operator(&self, mu: f64) -> Result<CsrMatrix> {
        self.sys.mass().linear_combination(1.0, self.sys.stiffness(), self.k * mu)
    }

    /// Returns ‖∇U(μ)‖²; the solution stays in `self.guess`.
    fn solve(&mut self, mu: f64) -> Result<f64> {
        let op = self.operator(mu)?;
        let rep = cg_solve_into(&op, &self.rhs, &mut self.guess, &self.opts)?;
        self.solves += 1;
        self.last_report = Some(rep);
        if !rep.converged {
            return Err(FemError::NotConverged {
                what: "CG in time step",
                iterations: rep.iterations,
                residual: rep.residual_norm,
            });
        }
        self.sys.stiffness().inner(&self.guess, &self.guess)
    }
}

fn step_inputs<F>(prev: &NodalField, t_next: f64, sys: &FemSystem, f: F, cfg: &SchemeConfig) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64, f64, f64) -> f64,
{
    cfg.validate_step()?;
    let prev_vals = prev.interior_values(sys)?;
    let load = load_vector(f, t_next, sys, &QuadratureRule::midpoint());
    Ok((prev_vals, load))
}

impl SchemeConfig {
    fn validate_step(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.nonlinear_tol > 0.0) || !(self.linear_tol > 0.0) {
            return Err(FemError::InvalidConfig("time step and tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Fully implicit backward Euler step.
pub fn be_step<F>(prev: &NodalField, t_next: f64, sys: &FemSystem, f: F, cfg: &SchemeConfig) -> Result<StepResult>
where
    F: Fn(f64, f64, f64) -> f64,
{
    be_step_with_guess(prev, t_next, sys, f, cfg, 1.0)
}

/// Backward Euler step whose root search starts from coefficient guess `mu0`.
///
/// Any `mu0 >= 1` leads to a valid bracket: if g(μ₀) ≥ 0 the root lies in
/// [μ₀, 1 + φ(μ₀)], otherwise in [1 + φ(μ₀), μ₀].
pub fn be_step_with_guess<F>(
    prev: &NodalField,
    t_next: f64,
    sys: &FemSystem,
    f: F,
    cfg: &SchemeConfig,
    mu0: f64,
) -> Result<StepResult>
where
    F: Fn(f64, f64, f64) -> f64,
{
    let (prev_vals, load) = step_inputs(prev, t_next, sys, f, cfg)?;
    let mut solver = FrozenSolver::new(sys, &prev_vals, &load, cfg)?;
    let tol = cfg.nonlinear_tol;
    let fail = |msg: String| FemError::RootFind { t: t_next, msg };

    let mu0 = if mu0.is_finite() { mu0.max(1.0) } else { 1.0 };
    let phi0 = solver.solve(mu0)?;
    let g0 = 1.0 + phi0 - mu0;
    if g0.abs() <= tol {
        return finish(sys, solver, mu0, None);
    }

    let mu1 = 1.0 + phi0;
    let u0 = solver.guess.clone();
    let phi1 = solver.solve(mu1)?;
    let g1 = 1.0 + phi1 - mu1;
    if g1.abs() <= tol {
        return finish(sys, solver, mu1, None);
    }

    let (mut lo, mut g_lo, mut phi_lo, mut hi, mut g_hi, mut phi_hi) = if g0 > 0.0 {
        (mu0, g0, phi0, mu1, g1, phi1)
    } else {
        (mu1, g1, phi1, mu0, g0, phi0)
    };
    if g_lo < 0.0 || g_hi > 0.0 {
        return Err(fail(format!(
            "no sign change on [{lo}, {hi}]: g = ({g_lo:e}, {g_hi:e})"
        )));
    }

    // Illinois-modified regula falsi with bisection fallback.
    let mut side = 0i8;
    let (mut best, mut best_u) = if g0.abs() < g1.abs() {
        ((mu0, g0), u0)
    } else {
        ((mu1, g1), solver.guess.clone())
    };
    for iter in 2..cfg.max_root_iters {
        check_monotone(phi_lo, phi_hi, tol).map_err(fail)?;
        let width = hi - lo;
        let mut mu = lo + g_lo * width / (g_lo - g_hi);
        if !(mu > lo && mu < hi) {
            mu = 0.5 * (lo + hi);
        }
        let phi = solver.solve(mu)?;
        let g = 1.0 + phi - mu;
        trace!("t={t_next} iter={iter} mu={mu} g={g:e}");
        if g.abs() < best.1.abs() {
            best = (mu, g);
            best_u.copy_from_slice(&solver.guess);
        }
        if g.abs() <= tol {
            let bracket = RootBracket { lo, hi, g_lo, g_hi, phi_lo, phi_hi };
            return finish(sys, solver, mu, Some(bracket));
        }
        if g > 0.0 {
            lo = mu;
            g_lo = g;
            phi_lo = phi;
            if side == 1 {
                g_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = mu;
            g_hi = g;
            phi_hi = phi;
            if side == -1 {
                g_lo *= 0.5;
            }
            side = -1;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            // bracket collapsed to rounding level; g is as small as the linear solves allow
            if best.1.abs() <= 10.0 * tol {
                solver.guess.copy_from_slice(&best_u);
                let bracket = RootBracket { lo, hi, g_lo, g_hi, phi_lo, phi_hi };
                return finish(sys, solver, best.0, Some(bracket));
            }
            return Err(fail(format!("bracket collapsed at mu={} with |g|={:e}", best.0, best.1.abs())));
        }
    }
    Err(fail(format!(
        "no convergence in {} iterations (best |g| = {:e})",
        cfg.max_root_iters,
        best.1.abs()
    )))
}

fn check_monotone(phi_lo: f64, phi_hi: f64, tol: f64) -> std::result::Result<(), String> {
    if phi_hi > phi_lo + tol.max(1e-12 * phi_lo.abs()) {
        Err(format!("gradient energy increased with the coefficient: {phi_lo:e} -> {phi_hi:e}"))
    } else {
        Ok(())
    }
}

fn finish(
    sys: &FemSystem,
    solver: FrozenSolver<'_>,
    mu: f64,
    bracket: Option<RootBracket>,
) -> Result<StepResult> {
    let linear_report = solver.last_report.expect("at least one solve");
    let nonlinear_iters = solver.solves;
    let field = NodalField::from_interior(sys, &solver.guess)?;
    Ok(StepResult { field, mu, nonlinear_iters, linear_report, bracket })
}

/// Linearized step with μ = 1 + ‖∇U_prev‖².
pub fn mbe_step<F>(prev: &NodalField, t_next: f64, sys: &FemSystem, f: F, cfg: &SchemeConfig) -> Result<StepResult>
where
    F: Fn(f64, f64, f64) -> f64,
{
    let (prev_vals, load) = step_inputs(prev, t_next, sys, f, cfg)?;
    let mu = 1.0 + sys.stiffness().inner(&prev_vals, &prev_vals)?;
    let mut solver = FrozenSolver::new(sys, &prev_vals, &load, cfg)?;
    solver.solve(mu)?;
    finish(sys, solver, mu, None)
}

pub(crate) fn step<F>(kind: SchemeKind, prev: &NodalField, t_next: f64, sys: &FemSystem, f: F, cfg: &SchemeConfig) -> Result<StepResult>
where
    F: Fn(f64, f64, f64) -> f64,
{
    match kind {
        SchemeKind::BackwardEuler => be_step(prev, t_next, sys, f, cfg),
        SchemeKind::ModifiedBackwardEuler => mbe_step(prev, t_next, sys, f, cfg),
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::assembly::{assemble, h1_seminorm_sq, l2_norm_of_function};
    use crate::mesh::Mesh;
    use crate::problems::{example2, zero_forcing};

    fn sys(level: u32) -> FemSystem {
        assemble(Arc::new(Mesh::uniform(level).unwrap())).unwrap()
    }

    fn cfg(kind: SchemeKind, dt: f64) -> SchemeConfig {
        SchemeConfig::new(kind, dt, 1.0)
    }

    #[test]
    fn zero_state_stays_zero() {
        let s = sys(2);
        let zero = NodalField::zeros(s.mesh().clone());
        for kind in [SchemeKind::BackwardEuler, SchemeKind::ModifiedBackwardEuler] {
            let r = step(kind, &zero, 0.1, &s, zero_forcing, &cfg(kind, 0.1)).unwrap();
            assert!(r.field.coeffs().iter().all(|&c| c == 0.0));
            assert_eq!(r.mu, 1.0);
        }
    }

    #[test]
    fn be_coefficient_is_consistent_and_bounded() {
        let s = sys(2);
        let p = example2();
        let prev = NodalField::interpolate(s.mesh().clone(), |x, y| 2.0 * (PI * x).sin() * (PI * y).sin());
        let k = 0.05;
        let c = cfg(SchemeKind::BackwardEuler, k);
        let r = be_step(&prev, 0.5, &s, p.f, &c).unwrap();
        let energy = h1_seminorm_sq(&r.field, &s).unwrap();
        assert!((r.mu - 1.0 - energy).abs() <= c.nonlinear_tol);

        let prev_energy = h1_seminorm_sq(&prev, &s).unwrap();
        let f_norm = l2_norm_of_function(p.f, 0.5, s.mesh(), &QuadratureRule::dunavant4());
        assert!(r.mu >= 1.0);
        assert!(r.mu <= 1.0 + prev_energy + k * f_norm * f_norm);

        let b = r.bracket.expect("nontrivial step needs a bracket");
        assert!(b.g_lo >= 0.0 && b.g_hi <= 0.0);
        assert!(b.phi_lo >= b.phi_hi);
        assert!(b.lo <= r.mu && r.mu <= b.hi);
    }

    #[test]
    fn be_independent_of_starting_guess() {
        let s = sys(2);
        let p = example2();
        let prev = NodalField::interpolate(s.mesh().clone(), |x, y| 3.0 * x * (1.0 - x) * y * (1.0 - y) * (5.0 * x).cos());
        let c = cfg(SchemeKind::BackwardEuler, 0.02);
        let reference = be_step(&prev, 0.3, &s, p.f, &c).unwrap();
        for mu0 in [1.0, 1.5, 3.0, 10.0, 100.0] {
            let r = be_step_with_guess(&prev, 0.3, &s, p.f, &c, mu0).unwrap();
            for (a, b) in r.field.coeffs().iter().zip(reference.field.coeffs()) {
                assert!((a - b).abs() < 1e-9, "mu0={mu0}");
            }
        }
    }

    #[test]
    fn mbe_with_zero_prev_is_a_heat_step() {
        let s = sys(2);
        let p = example2();
        let k = 0.01;
        let zero = NodalField::zeros(s.mesh().clone());
        let r = mbe_step(&zero, k, &s, p.f, &cfg(SchemeKind::ModifiedBackwardEuler, k)).unwrap();
        assert_eq!(r.mu, 1.0);
        let load = load_vector(p.f, k, &s, &QuadratureRule::midpoint());
        let op = s.mass().linear_combination(1.0, s.stiffness(), k).unwrap();
        let rhs: Vec<f64> = load.iter().map(|v| k * v).collect();
        let mut x = vec![0.0; rhs.len()];
        cg_solve_into(&op, &rhs, &mut x, &CgOptions::with_tol(1e-13)).unwrap();
        let got = r.field.interior_values(&s).unwrap();
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in got.iter().zip(&x) {
            assert!((a - b).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn mbe_differs_from_be_at_second_order() {
        // f = 0 and an eigenvector start keep every iterate on one smooth mode,
        // so the O(k) coefficient lag shows up as an O(k²) difference.
        let s = sys(2);
        let pair = crate::sparse::inverse_power_iteration(s.stiffness(), s.mass(), 1e-14).unwrap();
        let start: Vec<f64> = pair.vector.iter().map(|v| 0.3 * v).collect();
        let prev = NodalField::from_interior(&s, &start).unwrap();
        let diff = |k: f64| {
            let mut c = cfg(SchemeKind::BackwardEuler, k);
            c.linear_tol = 1e-14;
            c.nonlinear_tol = 1e-14;
            let be = be_step(&prev, k, &s, zero_forcing, &c).unwrap();
            let mbe = mbe_step(&prev, k, &s, zero_forcing, &c).unwrap();
            let d: Vec<f64> = be.field.coeffs().iter().zip(mbe.field.coeffs()).map(|(a, b)| a - b).collect();
            d.iter().map(|v| v * v).sum::<f64>().sqrt()
        };
        let mut prev_d = diff(1e-3);
        for k in [5e-4, 2.5e-4, 1.25e-4] {
            let d = diff(k);
            let ratio = prev_d / d;
            assert!((3.4..=4.6).contains(&ratio), "k={k} ratio={ratio}");
            prev_d = d;
        }
    }

    #[test]
    fn mesh_mismatch_rejected() {
        let s = sys(1);
        let other = NodalField::zeros(Arc::new(Mesh::uniform(2).unwrap()));
        assert!(matches!(
            be_step(&other, 0.1, &s, zero_forcing, &cfg(SchemeKind::BackwardEuler, 0.1)),
            Err(FemError::MeshMismatch)
        ));
    }
}
