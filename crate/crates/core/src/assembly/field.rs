use std::sync::Arc;

use super::system::FemSystem;
use crate::error::{FemError, Result};
use crate::mesh::Mesh;

/// Coefficients of a P1 function vanishing on the Dirichlet boundary.
#[derive(Debug, Clone)]
pub struct NodalField {
    mesh: Arc<Mesh>,
    coeffs: Vec<f64>,
}

impl NodalField {
    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let coeffs = vec![0.0; mesh.num_vertices()];
        NodalField { mesh, coeffs }
    }

    /// Nodal interpolant of `g`, with boundary values forced to zero.
    pub fn interpolate(mesh: Arc<Mesh>, g: impl Fn(f64, f64) -> f64) -> Self {
        let coeffs = mesh
            .vertices()
            .iter()
            .zip(mesh.is_boundary())
            .map(|(p, &b)| if b { 0.0 } else { g(p[0], p[1]) })
            .collect();
        NodalField { mesh, coeffs }
    }

    pub fn from_coeffs(mesh: Arc<Mesh>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != mesh.num_vertices() {
            return Err(FemError::DimensionMismatch { expected: mesh.num_vertices(), got: coeffs.len() });
        }
        if let Some(v) = coeffs.iter().zip(mesh.is_boundary()).position(|(&c, &b)| b && c != 0.0) {
            return Err(FemError::InvalidConfig(format!("nonzero coefficient at boundary vertex {v}")));
        }
        Ok(NodalField { mesh, coeffs })
    }

    pub fn from_interior(sys: &FemSystem, values: &[f64]) -> Result<Self> {
        if values.len() != sys.num_unknowns() {
            return Err(FemError::DimensionMismatch { expected: sys.num_unknowns(), got: values.len() });
        }
        let mut coeffs = vec![0.0; sys.mesh().num_vertices()];
        for (&v, &x) in sys.interior_vertices().iter().zip(values) {
            coeffs[v] = x;
        }
        Ok(NodalField { mesh: sys.mesh().clone(), coeffs })
    }

    /// Coefficients at the system's unknowns.
    pub fn interior_values(&self, sys: &FemSystem) -> Result<Vec<f64>> {
        self.check_mesh(sys.mesh())?;
        Ok(sys.interior_vertices().iter().map(|&v| self.coeffs[v]).collect())
    }

    pub fn check_mesh(&self, mesh: &Arc<Mesh>) -> Result<()> {
        if Arc::ptr_eq(&self.mesh, mesh) || *self.mesh == **mesh {
            Ok(())
        } else {
            Err(FemError::MeshMismatch)
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Value and gradient on triangle `t` at barycentric point `bary`.
    pub(crate) fn eval_on(&self, t: usize, bary: &[f64; 3], grads: &[[f64; 2]; 3]) -> (f64, [f64; 2]) {
        let tri = self.mesh.triangles()[t];
        let c = tri.map(|v| self.coeffs[v]);
        let val = c[0] * bary[0] + c[1] * bary[1] + c[2] * bary[2];
        let grad = [
            c[0] * grads[0][0] + c[1] * grads[1][0] + c[2] * grads[2][0],
            c[0] * grads[0][1] + c[1] * grads[1][1] + c[2] * grads[2][1],
        ];
        (val, grad)
    }
}

#[cfg(test)]
impl NodalField {
    /// Bypasses the Dirichlet invariant; for norm tests with non-vanishing functions.
    pub(crate) fn raw_for_tests(mesh: Arc<Mesh>, coeffs: Vec<f64>) -> Self {
        NodalField { mesh, coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble;

    #[test]
    fn interpolant_zero_on_boundary() {
        let mesh = Arc::new(Mesh::uniform(1).unwrap());
        let f = NodalField::interpolate(mesh.clone(), |_, _| 1.0);
        for (&c, &b) in f.coeffs().iter().zip(mesh.is_boundary()) {
            assert_eq!(c, if b { 0.0 } else { 1.0 });
        }
    }

    #[test]
    fn boundary_invariant_enforced() {
        let mesh = Arc::new(Mesh::uniform(0).unwrap());
        let mut c = vec![0.0; 9];
        c[0] = 1.0;
        assert!(NodalField::from_coeffs(mesh.clone(), c).is_err());
        assert!(NodalField::from_coeffs(mesh, vec![0.0; 8]).is_err());
    }

    #[test]
    fn interior_round_trip_and_mismatch() {
        let mesh = Arc::new(Mesh::uniform(1).unwrap());
        let sys = assemble(mesh.clone()).unwrap();
        let vals: Vec<f64> = (0..sys.num_unknowns()).map(|i| i as f64).collect();
        let f = NodalField::from_interior(&sys, &vals).unwrap();
        assert_eq!(f.interior_values(&sys).unwrap(), vals);

        let other = assemble(Arc::new(Mesh::uniform(2).unwrap())).unwrap();
        assert!(matches!(f.interior_values(&other), Err(FemError::MeshMismatch)));
    }
}
