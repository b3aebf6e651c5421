use super::element::barycentric_gradients;
use super::field::NodalField;
use super::quadrature::QuadratureRule;
use super::system::FemSystem;
use crate::error::{FemError, Result};
use crate::mesh::Mesh;

/// ‖∇u_h‖² = uᵀ A u. Exact for P1 since gradients are piecewise constant.
pub fn h1_seminorm_sq(u: &NodalField, sys: &FemSystem) -> Result<f64> {
    let x = u.interior_values(sys)?;
    sys.stiffness().inner(&x, &x)
}

/// ‖u_h‖² = uᵀ M u.
pub fn l2_norm_sq(u: &NodalField, sys: &FemSystem) -> Result<f64> {
    let x = u.interior_values(sys)?;
    sys.mass().inner(&x, &x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    /// ‖∇(u − u_h)‖
    pub h1_semi: f64,
    /// √(‖u − u_h‖² + ‖∇(u − u_h)‖²)
    pub h1_full: f64,
}

fn require_degree(rule: &QuadratureRule) -> Result<()> {
    if rule.degree < 4 {
        return Err(FemError::InvalidConfig(format!(
            "error norms need a quadrature rule of degree >= 4, got {}",
            rule.degree
        )));
    }
    Ok(())
}

/// Elementwise quadrature of (u − u_h)² and |∇u − ∇u_h|².
pub fn error_norms<U, G>(exact_u: U, exact_grad: G, u_h: &NodalField, t: f64, rule: &QuadratureRule) -> Result<ErrorNorms>
where
    U: Fn(f64, f64, f64) -> f64,
    G: Fn(f64, f64, f64) -> [f64; 2],
{
    require_degree(rule)?;
    let mesh = u_h.mesh();
    let (mut l2, mut semi) = (0.0, 0.0);
    for k in 0..mesh.num_triangles() {
        let coords = mesh.triangle_coords(k);
        let (grads, area) = barycentric_gradients(&coords);
        let (mut el2, mut esemi) = (0.0, 0.0);
        for (x, bary, w) in rule.map_points(&coords) {
            let (val, grad) = u_h.eval_on(k, bary, &grads);
            let e = exact_u(x[0], x[1], t) - val;
            let g = exact_grad(x[0], x[1], t);
            let (gx, gy) = (g[0] - grad[0], g[1] - grad[1]);
            el2 += w * e * e;
            esemi += w * (gx * gx + gy * gy);
        }
        l2 += area * el2;
        semi += area * esemi;
    }
    Ok(ErrorNorms { l2: l2.sqrt(), h1_semi: semi.sqrt(), h1_full: (l2 + semi).sqrt() })
}

pub fn l2_error<U>(exact_u: U, u_h: &NodalField, t: f64, rule: &QuadratureRule) -> Result<f64>
where
    U: Fn(f64, f64, f64) -> f64,
{
    error_norms(exact_u, |_, _, _| [0.0, 0.0], u_h, t, rule).map(|e| e.l2)
}

/// H¹ seminorm error ‖∇u − ∇u_h‖.
pub fn h1_error<G>(exact_grad: G, u_h: &NodalField, t: f64, rule: &QuadratureRule) -> Result<f64>
where
    G: Fn(f64, f64, f64) -> [f64; 2],
{
    error_norms(|_, _, _| 0.0, exact_grad, u_h, t, rule).map(|e| e.h1_semi)
}

pub fn h1_full_error<U, G>(exact_u: U, exact_grad: G, u_h: &NodalField, t: f64, rule: &QuadratureRule) -> Result<f64>
where
    U: Fn(f64, f64, f64) -> f64,
    G: Fn(f64, f64, f64) -> [f64; 2],
{
    error_norms(exact_u, exact_grad, u_h, t, rule).map(|e| e.h1_full)
}

/// ‖g(·, t)‖ over the mesh by quadrature.
pub fn l2_norm_of_function<F>(g: F, t: f64, mesh: &Mesh, rule: &QuadratureRule) -> f64
where
    F: Fn(f64, f64, f64) -> f64,
{
    let mut acc = 0.0;
    for k in 0..mesh.num_triangles() {
        let s: f64 = rule
            .map_points(&mesh.triangle_coords(k))
            .map(|(x, _, w)| {
                let v = g(x[0], x[1], t);
                w * v * v
            })
            .sum();
        acc += mesh.area(k) * s;
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::assembly::assemble;

    fn setup(level: u32) -> (Arc<Mesh>, FemSystem) {
        let mesh = Arc::new(Mesh::uniform(level).unwrap());
        let sys = assemble(mesh.clone()).unwrap();
        (mesh, sys)
    }

    #[test]
    fn seminorm_basics() {
        let (mesh, sys) = setup(0);
        assert_eq!(h1_seminorm_sq(&NodalField::zeros(mesh.clone()), &sys).unwrap(), 0.0);
        let unit = NodalField::from_interior(&sys, &[1.0]).unwrap();
        assert!((h1_seminorm_sq(&unit, &sys).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn seminorm_of_sine_interpolant() {
        let (mesh, sys) = setup(4);
        let u = NodalField::interpolate(mesh, |x, y| (PI * x).sin() * (PI * y).sin());
        let e = h1_seminorm_sq(&u, &sys).unwrap();
        let exact = PI * PI / 2.0;
        assert!(((e - exact) / exact).abs() < 0.015, "{e}");
    }

    #[test]
    fn linears_are_reproduced() {
        // x + y does not vanish on ∂Ω, so build the interpolant on all vertices
        let mesh = Arc::new(Mesh::uniform(2).unwrap());
        let coeffs: Vec<f64> = mesh.vertices().iter().map(|p| p[0] + p[1]).collect();
        let raw = NodalField::raw_for_tests(mesh, coeffs);
        let rule = QuadratureRule::dunavant4();
        let e = error_norms(|x, y, _| x + y, |_, _, _| [1.0, 1.0], &raw, 0.0, &rule).unwrap();
        assert!(e.l2 <= 1e-13 && e.h1_semi <= 1e-13, "{e:?}");
    }

    #[test]
    fn l2_error_of_zero_field() {
        let (mesh, _) = setup(3);
        let rule = QuadratureRule::dunavant4();
        let zero = NodalField::zeros(mesh.clone());
        let e = l2_error(|x, y, _| (PI * x).sin() * (PI * y).sin(), &zero, 0.3, &rule).unwrap();
        assert!((e - 0.5).abs() < 1e-4, "{e}");
        let e6 = l2_error(|x, y, _| (PI * x).sin() * (PI * y).sin(), &zero, 0.3, &QuadratureRule::dunavant6()).unwrap();
        assert!((e6 - 0.5).abs() < 1e-6, "{e6}");
    }

    #[test]
    fn low_degree_rule_rejected() {
        let (mesh, _) = setup(0);
        let zero = NodalField::zeros(mesh);
        assert!(l2_error(|_, _, _| 0.0, &zero, 0.0, &QuadratureRule::midpoint()).is_err());
    }

    #[test]
    fn l2_norm_matches_mass_form() {
        let (mesh, sys) = setup(3);
        let u = NodalField::interpolate(mesh.clone(), |x, y| x * (1.0 - x) * y * (1.0 - y));
        // a P1 function: quadrature of its square is exact with a degree-2+ rule
        let via_quad = {
            let zero = NodalField::zeros(mesh.clone());
            let mut acc = 0.0;
            let rule = QuadratureRule::dunavant4();
            for k in 0..mesh.num_triangles() {
                let coords = mesh.triangle_coords(k);
                let (g, area) = barycentric_gradients(&coords);
                for (_, bary, w) in rule.map_points(&coords) {
                    let (v, _) = u.eval_on(k, bary, &g);
                    let _ = zero.eval_on(k, bary, &g);
                    acc += area * w * v * v;
                }
            }
            acc
        };
        assert!((l2_norm_sq(&u, &sys).unwrap() - via_quad).abs() < 1e-15);
    }
}
