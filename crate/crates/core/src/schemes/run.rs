use std::sync::Arc;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::step::step;
use super::{SchemeConfig, SchemeKind, DIAGNOSTIC_REL_TOL};
use crate::assembly::{
    apply_discrete_laplacian, assemble, h1_seminorm_sq, l2_norm_of_function, l2_norm_sq, FemSystem, NodalField,
    QuadratureRule,
};
use crate::error::{FemError, Result};
use crate::mesh::Mesh;
use crate::problems::ProblemSpec;

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRecord {
    pub t: f64,
    /// ‖U^n‖
    pub l2_norm: f64,
    /// ‖∇U^n‖
    pub h1_seminorm: f64,
    pub mu: f64,
    /// ‖f(t_n)‖ by quadrature
    pub f_norm: f64,
    /// ‖Δ_h U^n‖
    pub laplacian_norm: f64,
    /// ‖U^n‖
    pub stability_lhs: f64,
    /// ‖U^0‖ + 2k Σ_{m≤n} ‖f^m‖
    pub stability_rhs: f64,
    /// ‖f^n‖² − (∂̄‖∇U^n‖² + μ‖Δ_h U^n‖²); nonnegative when the inequality holds.
    pub gradient_ineq_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub l2_norm: f64,
    pub h1_seminorm: f64,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub system: FemSystem,
    pub initial: InitialState,
    pub final_field: NodalField,
    pub series: Vec<TimeSeriesRecord>,
    pub stability: StabilityReport,
}

impl Simulation {
    pub fn f_norms(&self) -> Vec<f64> {
        self.series.iter().map(|r| r.f_norm).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub steps_checked: usize,
    /// min over steps of (rhs − lhs) / scale for the L² bound
    pub min_stability_slack: f64,
    /// min over steps of the scaled gradient-inequality residual
    pub min_gradient_slack: f64,
    /// Whether the gradient inequality was asserted (fully implicit scheme only).
    pub gradient_asserted: bool,
    /// Steps where the monitored (not asserted) gradient inequality failed.
    pub gradient_monitor_failures: usize,
}

/// Runs `cfg.num_steps()` steps from the nodal interpolant of `problem.u0`.
pub fn run_simulation(problem: &ProblemSpec, mesh: Arc<Mesh>, cfg: &SchemeConfig) -> Result<Simulation> {
    cfg.validate()?;
    let sys = assemble(mesh.clone())?;
    let norm_rule = QuadratureRule::dunavant4();
    let k = cfg.dt;
    let n_steps = cfg.num_steps();

    let mut field = NodalField::interpolate(mesh.clone(), problem.u0);
    let initial = InitialState {
        l2_norm: l2_norm_sq(&field, &sys)?.sqrt(),
        h1_seminorm: h1_seminorm_sq(&field, &sys)?.sqrt(),
    };
    debug!(
        "{}: {} steps of {} with k = {k:e} on {} unknowns",
        problem.name,
        n_steps,
        cfg.kind.short_name(),
        sys.num_unknowns()
    );

    let mut series = Vec::with_capacity(n_steps);
    let mut prev_energy = initial.h1_seminorm.powi(2);
    let mut forcing_sum = 0.0;
    for n in 1..=n_steps {
        let t = n as f64 * k;
        let res = step(cfg.kind, &field, t, &sys, problem.f, cfg)?;
        if !res.field.is_finite() || !res.mu.is_finite() {
            return Err(FemError::NonFinite { step: n, t });
        }
        field = res.field;

        let energy = h1_seminorm_sq(&field, &sys)?;
        let l2 = l2_norm_sq(&field, &sys)?.sqrt();
        let lap = apply_discrete_laplacian(&field, &sys)?;
        let lap_norm = l2_norm_sq(&lap, &sys)?.sqrt();
        let f_norm = l2_norm_of_function(problem.f, t, &mesh, &norm_rule);
        forcing_sum += f_norm;

        let lhs = (energy - prev_energy) / k + res.mu * lap_norm * lap_norm;
        let record = TimeSeriesRecord {
            t,
            l2_norm: l2,
            h1_seminorm: energy.sqrt(),
            mu: res.mu,
            f_norm,
            laplacian_norm: lap_norm,
            stability_lhs: l2,
            stability_rhs: initial.l2_norm + 2.0 * k * forcing_sum,
            gradient_ineq_residual: f_norm * f_norm - lhs,
        };
        if ![record.l2_norm, record.h1_seminorm, record.laplacian_norm].iter().all(|v| v.is_finite()) {
            return Err(FemError::NonFinite { step: n, t });
        }
        series.push(record);
        prev_energy = energy;
    }

    let f_norms: Vec<f64> = series.iter().map(|r| r.f_norm).collect();
    let stability = check_stability(&series, initial, &f_norms, k, cfg.kind)?;
    Ok(Simulation { system: sys, initial, final_field: field, series, stability })
}

/// Checks ‖U^N‖ ≤ ‖U^0‖ + 2k Σ‖f^n‖ at every step, and for the fully
/// implicit scheme ∂̄‖∇U^n‖² + (1 + ‖∇U^n‖²)‖Δ_h U^n‖² ≤ ‖f^n‖².
pub fn check_stability(
    series: &[TimeSeriesRecord],
    initial: InitialState,
    f_norms: &[f64],
    k: f64,
    kind: SchemeKind,
) -> Result<StabilityReport> {
    if f_norms.len() != series.len() {
        return Err(FemError::DimensionMismatch { expected: series.len(), got: f_norms.len() });
    }
    let gradient_asserted = kind == SchemeKind::BackwardEuler;
    let mut report = StabilityReport {
        steps_checked: 0,
        min_stability_slack: f64::INFINITY,
        min_gradient_slack: f64::INFINITY,
        gradient_asserted,
        gradient_monitor_failures: 0,
    };

    let mut forcing_sum = 0.0;
    let mut prev_energy = initial.h1_seminorm.powi(2);
    for (i, (rec, &f_norm)) in series.iter().zip(f_norms).enumerate() {
        let step = i + 1;
        forcing_sum += f_norm;
        let lhs = rec.l2_norm;
        let rhs = initial.l2_norm + 2.0 * k * forcing_sum;
        let scale = lhs.abs().max(rhs.abs());
        if lhs - rhs > DIAGNOSTIC_REL_TOL * scale {
            return Err(FemError::StabilityViolation { inequality: "L2 stability bound", step, lhs, rhs });
        }
        if scale > 0.0 {
            report.min_stability_slack = report.min_stability_slack.min((rhs - lhs) / scale);
        }

        let energy = rec.h1_seminorm.powi(2);
        let rate = (energy - prev_energy) / k;
        let dissipation = rec.mu * rec.laplacian_norm.powi(2);
        let glhs = rate + dissipation;
        let grhs = f_norm * f_norm;
        let gscale = grhs.max(dissipation).max(energy.max(prev_energy) / k);
        let violated = glhs - grhs > DIAGNOSTIC_REL_TOL * gscale;
        if violated {
            if gradient_asserted {
                return Err(FemError::StabilityViolation {
                    inequality: "gradient energy inequality",
                    step,
                    lhs: glhs,
                    rhs: grhs,
                });
            }
            report.gradient_monitor_failures += 1;
            warn!("gradient energy inequality fails at step {step} for the linearized scheme");
        }
        if gscale > 0.0 {
            report.min_gradient_slack = report.min_gradient_slack.min((grhs - glhs) / gscale);
        }
        prev_energy = energy;
        report.steps_checked += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{example2, example3, zero_forcing};

    #[test]
    fn zero_run_is_zero() {
        let p = ProblemSpec {
            name: "zero",
            u0: |_, _| 0.0,
            f: zero_forcing,
            exact_u: None,
            exact_grad: None,
            grad_energy: None,
        };
        for kind in [SchemeKind::BackwardEuler, SchemeKind::ModifiedBackwardEuler] {
            let sim = run_simulation(&p, Arc::new(Mesh::uniform(1).unwrap()), &SchemeConfig::new(kind, 0.1, 1.0)).unwrap();
            assert_eq!(sim.series.len(), 10);
            for r in &sim.series {
                assert_eq!((r.l2_norm, r.h1_seminorm, r.mu, r.stability_rhs), (0.0, 0.0, 1.0, 0.0));
            }
        }
    }

    #[test]
    fn unforced_decay_is_monotone() {
        let cfg = SchemeConfig::new(SchemeKind::BackwardEuler, 1e-3, 0.05);
        let sim = run_simulation(&example3(), Arc::new(Mesh::uniform(2).unwrap()), &cfg).unwrap();
        assert_eq!(sim.series.len(), 50);
        let mut prev = (sim.initial.l2_norm, sim.initial.h1_seminorm);
        for r in &sim.series {
            assert!(r.l2_norm <= prev.0 && r.h1_seminorm < prev.1);
            assert_eq!(r.stability_rhs, sim.initial.l2_norm);
            prev = (r.l2_norm, r.h1_seminorm);
        }
    }

    #[test]
    fn both_inequalities_hold_for_example2() {
        let cfg = SchemeConfig::new(SchemeKind::BackwardEuler, 1.0 / 64.0, 1.0);
        let sim = run_simulation(&example2(), Arc::new(Mesh::uniform(2).unwrap()), &cfg).unwrap();
        assert!(sim.stability.gradient_asserted);
        assert!(sim.stability.min_stability_slack >= 0.0);
        assert!(sim.stability.min_gradient_slack >= -DIAGNOSTIC_REL_TOL);
        for r in &sim.series {
            assert!(r.gradient_ineq_residual >= -1e-9 * r.f_norm.powi(2));
        }
    }

    #[test]
    fn violation_names_first_step() {
        let rec = |l2: f64| TimeSeriesRecord {
            t: 0.0,
            l2_norm: l2,
            h1_seminorm: 0.0,
            mu: 1.0,
            f_norm: 0.0,
            laplacian_norm: 0.0,
            stability_lhs: l2,
            stability_rhs: 1.0,
            gradient_ineq_residual: 0.0,
        };
        let series = [rec(1.0), rec(0.5), rec(1.5), rec(2.0)];
        let init = InitialState { l2_norm: 1.0, h1_seminorm: 0.0 };
        match check_stability(&series, init, &[0.0; 4], 0.1, SchemeKind::BackwardEuler) {
            Err(FemError::StabilityViolation { step, .. }) => assert_eq!(step, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = SchemeConfig::new(SchemeKind::BackwardEuler, 0.001, 0.0);
        assert!(matches!(
            run_simulation(&example3(), Arc::new(Mesh::uniform(1).unwrap()), &cfg),
            Err(FemError::InvalidConfig(_))
        ));
    }
}
