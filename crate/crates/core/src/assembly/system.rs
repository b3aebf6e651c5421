use std::sync::Arc;

use super::element::element_matrices;
use super::quadrature::QuadratureRule;
use crate::error::{FemError, Result};
use crate::mesh::Mesh;
use crate::sparse::{smallest_generalized_eigenvalue, CsrMatrix};

/// Mass and stiffness matrices restricted to interior (non-Dirichlet) unknowns.
#[derive(Debug, Clone)]
pub struct FemSystem {
    mesh: Arc<Mesh>,
    mass: CsrMatrix,
    stiffness: CsrMatrix,
    /// unknown index -> vertex index
    interior: Vec<usize>,
    /// vertex index -> unknown index
    unknown_of: Vec<Option<usize>>,
}

impl FemSystem {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn num_unknowns(&self) -> usize {
        self.interior.len()
    }

    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior
    }

    pub fn unknown_of(&self, vertex: usize) -> Option<usize> {
        self.unknown_of[vertex]
    }

    /// Discrete first Dirichlet eigenvalue λ₁ʰ of A x = λ M x.
    pub fn smallest_eigenvalue(&self, tol: f64) -> Result<f64> {
        smallest_generalized_eigenvalue(&self.stiffness, &self.mass, tol)
    }
}

/// Global mass and stiffness over all vertices, Dirichlet rows included.
pub fn assemble_full(mesh: &Mesh) -> Result<(CsrMatrix, CsrMatrix)> {
    assemble_full_ordered(mesh, 0..mesh.num_triangles())
}

pub(crate) fn assemble_full_ordered(
    mesh: &Mesh,
    order: impl Iterator<Item = usize>,
) -> Result<(CsrMatrix, CsrMatrix)> {
    let n = mesh.num_vertices();
    let mut mass = Vec::with_capacity(9 * mesh.num_triangles());
    let mut stiff = Vec::with_capacity(9 * mesh.num_triangles());
    for t in order {
        let tri = mesh.triangles()[t];
        let e = element_matrices(&mesh.triangle_coords(t)).map_err(|_| FemError::DegenerateTriangle {
            index: t,
            line: None,
            area: mesh.area(t),
        })?;
        for a in 0..3 {
            for b in 0..3 {
                mass.push((tri[a], tri[b], e.mass[a][b]));
                stiff.push((tri[a], tri[b], e.stiffness[a][b]));
            }
        }
    }
    Ok((CsrMatrix::from_triplets(n, n, &mass)?, CsrMatrix::from_triplets(n, n, &stiff)?))
}

/// Assembles M and A with Dirichlet rows and columns eliminated.
pub fn assemble(mesh: Arc<Mesh>) -> Result<FemSystem> {
    let mut unknown_of = vec![None; mesh.num_vertices()];
    let mut interior = Vec::new();
    for (v, &b) in mesh.is_boundary().iter().enumerate() {
        if !b {
            unknown_of[v] = Some(interior.len());
            interior.push(v);
        }
    }
    if interior.is_empty() {
        return Err(FemError::NoInteriorVertices);
    }

    let n = interior.len();
    let mut mass = Vec::with_capacity(9 * mesh.num_triangles());
    let mut stiff = Vec::with_capacity(9 * mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let e = element_matrices(&mesh.triangle_coords(t)).map_err(|_| FemError::DegenerateTriangle {
            index: t,
            line: None,
            area: mesh.area(t),
        })?;
        for a in 0..3 {
            let Some(i) = unknown_of[tri[a]] else { continue };
            for b in 0..3 {
                let Some(j) = unknown_of[tri[b]] else { continue };
                mass.push((i, j, e.mass[a][b]));
                stiff.push((i, j, e.stiffness[a][b]));
            }
        }
    }

    Ok(FemSystem {
        mass: CsrMatrix::from_triplets(n, n, &mass)?,
        stiffness: CsrMatrix::from_triplets(n, n, &stiff)?,
        mesh,
        interior,
        unknown_of,
    })
}

/// Interior load vector F_i ≈ ∫ f(·, t) φ_i by elementwise quadrature.
pub fn load_vector<F>(f: F, t: f64, sys: &FemSystem, rule: &QuadratureRule) -> Vec<f64>
where
    F: Fn(f64, f64, f64) -> f64,
{
    let mesh = sys.mesh();
    let mut out = vec![0.0; sys.num_unknowns()];
    for (k, tri) in mesh.triangles().iter().enumerate() {
        let unknowns = tri.map(|v| sys.unknown_of(v));
        if unknowns.iter().all(Option::is_none) {
            continue;
        }
        let area = mesh.area(k);
        let mut local = [0.0; 3];
        for (x, bary, w) in rule.map_points(&mesh.triangle_coords(k)) {
            let fv = w * f(x[0], x[1], t);
            for a in 0..3 {
                local[a] += fv * bary[a];
            }
        }
        for a in 0..3 {
            if let Some(i) = unknowns[a] {
                out[i] += area * local[a];
            }
        }
    }
    out
}
