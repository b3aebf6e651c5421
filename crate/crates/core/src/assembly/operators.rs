use super::element::barycentric_gradients;
use super::field::NodalField;
use super::quadrature::QuadratureRule;
use super::system::FemSystem;
use crate::error::{FemError, Result};
use crate::sparse::{cg_solve, CgOptions};

/// Mass-solve tolerance for Δ_h.
pub const LAPLACIAN_MASS_TOL: f64 = 1e-12;

/// Discrete Laplacian: w with M w = −A u, i.e. (−Δ_h u, v) = (∇u, ∇v) on V_h.
pub fn apply_discrete_laplacian(u: &NodalField, sys: &FemSystem) -> Result<NodalField> {
    let x = u.interior_values(sys)?;
    let rhs: Vec<f64> = sys.stiffness().mul_vec(&x)?.into_iter().map(|v| -v).collect();
    let (w, rep) = cg_solve(sys.mass(), &rhs, &CgOptions::with_tol(LAPLACIAN_MASS_TOL))?;
    if !rep.converged {
        return Err(FemError::NotConverged {
            what: "mass solve for the discrete Laplacian",
            iterations: rep.iterations,
            residual: rep.residual_norm,
        });
    }
    NodalField::from_interior(sys, &w)
}

/// Ritz projection ũ: (∇(u − ũ), ∇χ) = 0 for all χ in V_h.
pub fn ritz_projection<G>(exact_grad: G, t: f64, sys: &FemSystem, rule: &QuadratureRule) -> Result<NodalField>
where
    G: Fn(f64, f64, f64) -> [f64; 2],
{
    let b = ritz_load(exact_grad, t, sys, rule);
    let (x, rep) = cg_solve(sys.stiffness(), &b, &CgOptions::with_tol(1e-12))?;
    if !rep.converged {
        return Err(FemError::NotConverged {
            what: "Ritz projection",
            iterations: rep.iterations,
            residual: rep.residual_norm,
        });
    }
    NodalField::from_interior(sys, &x)
}

/// b_i = ∫ ∇u · ∇φ_i by quadrature.
pub(crate) fn ritz_load<G>(exact_grad: G, t: f64, sys: &FemSystem, rule: &QuadratureRule) -> Vec<f64>
where
    G: Fn(f64, f64, f64) -> [f64; 2],
{
    let mesh = sys.mesh();
    let mut b = vec![0.0; sys.num_unknowns()];
    for (k, tri) in mesh.triangles().iter().enumerate() {
        let coords = mesh.triangle_coords(k);
        let (grads, area) = barycentric_gradients(&coords);
        let mut mean = [0.0; 2];
        for (x, _, w) in rule.map_points(&coords) {
            let g = exact_grad(x[0], x[1], t);
            mean[0] += w * g[0];
            mean[1] += w * g[1];
        }
        for a in 0..3 {
            if let Some(i) = sys.unknown_of(tri[a]) {
                b[i] += area * (mean[0] * grads[a][0] + mean[1] * grads[a][1]);
            }
        }
    }
    b
}
