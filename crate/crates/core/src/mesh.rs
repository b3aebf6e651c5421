//! Conforming triangulations of 2D polygonal domains.
//!
//! Uniform meshes of the unit square split every square cell along the
//! diagonal from its lower-left to its upper-right corner. On that pattern the
//! P1 stiffness matrix coincides with the 5-point finite difference Laplacian.
//!
//! The text format understood by [`Mesh::from_text`] is
//!
//! ```text
//! # comment
//! v <x> <y>
//! t <i> <j> <k>
//! ```
//!
//! with 0-based vertex indices.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{FemError, Result};

/// Default upper bound on [`Mesh::uniform`] levels (level 10 has ~4.2M triangles).
pub const DEFAULT_LEVEL_CAP: u32 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    is_boundary: Vec<bool>,
    h: f64,
}

impl Mesh {
    /// Builds a mesh from raw vertices and triangles.
    ///
    /// Clockwise triangles are reoriented. Boundary vertices are those lying
    /// on an edge that belongs to exactly one triangle.
    pub fn new(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::build(vertices, triangles, None)
    }

    fn build(
        vertices: Vec<[f64; 2]>,
        mut triangles: Vec<[usize; 3]>,
        lines: Option<&[usize]>,
    ) -> Result<Self> {
        let count = vertices.len();
        for (index, tri) in triangles.iter_mut().enumerate() {
            let line = lines.map(|l| l[index]);
            if let Some(&vertex) = tri.iter().find(|&&v| v >= count) {
                return Err(FemError::DanglingVertex {
                    index,
                    line,
                    vertex,
                    count,
                });
            }
            let area = signed_area(&vertices, tri);
            let scale = edge_scale(&vertices, tri);
            if !(area.abs() > 1e-14 * scale * scale) {
                return Err(FemError::DegenerateTriangle { index, line, area });
            }
            if area < 0.0 {
                tri.swap(1, 2);
            }
        }

        let mut edge_count: HashMap<(usize, usize), u32> = HashMap::new();
        for tri in &triangles {
            for (a, b) in tri_edges(tri) {
                *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut is_boundary = vec![false; count];
        for (&(a, b), &n) in &edge_count {
            if n == 1 {
                is_boundary[a] = true;
                is_boundary[b] = true;
            }
        }

        let h = max_edge(&vertices, &triangles);
        Ok(Mesh {
            vertices,
            triangles,
            is_boundary,
            h,
        })
    }

    /// Uniform mesh of the unit square with `n = 2^(level+1)` cells per side.
    pub fn uniform(level: u32) -> Result<Self> {
        Self::uniform_with_cap(level, DEFAULT_LEVEL_CAP)
    }

    pub fn uniform_with_cap(level: u32, cap: u32) -> Result<Self> {
        if level > cap {
            return Err(FemError::LevelTooLarge { level, cap });
        }
        let n = 1usize << (level + 1);
        let step = 1.0 / n as f64;
        let idx = |i: usize, j: usize| j * (n + 1) + i;

        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        let mut is_boundary = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 * step, j as f64 * step]);
                is_boundary.push(i == 0 || j == 0 || i == n || j == n);
            }
        }

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v11, v01) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }

        let h = max_edge(&vertices, &triangles);
        Ok(Mesh {
            vertices,
            triangles,
            is_boundary,
            h,
        })
    }

    /// Parses the `v`/`t` text format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut tri_lines = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut tokens = content.split_whitespace();
            let tag = tokens.next().unwrap_or_default();
            let rest: Vec<&str> = tokens.collect();
            let parse_err = |msg: String| FemError::MeshParse { line, msg };
            match tag {
                "v" => {
                    if rest.len() != 2 {
                        return Err(parse_err(format!("expected 2 coordinates, found {}", rest.len())));
                    }
                    let mut xy = [0.0; 2];
                    for (slot, tok) in xy.iter_mut().zip(&rest) {
                        *slot = tok
                            .parse::<f64>()
                            .map_err(|e| parse_err(format!("bad coordinate `{tok}`: {e}")))?;
                        if !slot.is_finite() {
                            return Err(parse_err(format!("non-finite coordinate `{tok}`")));
                        }
                    }
                    vertices.push(xy);
                }
                "t" => {
                    if rest.len() != 3 {
                        return Err(parse_err(format!("expected 3 vertex indices, found {}", rest.len())));
                    }
                    let mut tri = [0usize; 3];
                    for (slot, tok) in tri.iter_mut().zip(&rest) {
                        *slot = tok
                            .parse::<usize>()
                            .map_err(|e| parse_err(format!("bad vertex index `{tok}`: {e}")))?;
                    }
                    triangles.push(tri);
                    tri_lines.push(line);
                }
                other => return Err(parse_err(format!("unknown record `{other}`"))),
            }
        }

        if triangles.is_empty() {
            return Err(FemError::MeshParse {
                line: text.lines().count(),
                msg: "no triangles".into(),
            });
        }
        Self::build(vertices, triangles, Some(&tri_lines))
    }

    /// Serializes to the `v`/`t` text format with round-trip exact coordinates.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} vertices, {} triangles", self.vertices.len(), self.triangles.len());
        for [x, y] in &self.vertices {
            let _ = writeln!(out, "v {x:?} {y:?}");
        }
        for [a, b, c] in &self.triangles {
            let _ = writeln!(out, "t {a} {b} {c}");
        }
        out
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_boundary(&self) -> &[bool] {
        &self.is_boundary
    }

    /// Maximum element diameter (longest edge).
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_interior(&self) -> usize {
        self.is_boundary.iter().filter(|&&b| !b).count()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Positive area of triangle `t`.
    pub fn area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }
}

/// Mesh-size parameter `1/n` of a uniform level, as used in convergence tables.
pub fn uniform_spacing(level: u32) -> f64 {
    1.0 / (1u64 << (level + 1)) as f64
}

fn signed_area(vertices: &[[f64; 2]], tri: &[usize; 3]) -> f64 {
    let [a, b, c] = tri.map(|i| vertices[i]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn tri_edges(tri: &[usize; 3]) -> [(usize, usize); 3] {
    [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])]
}

fn edge_scale(vertices: &[[f64; 2]], tri: &[usize; 3]) -> f64 {
    tri_edges(tri)
        .iter()
        .map(|&(a, b)| dist(vertices[a], vertices[b]))
        .fold(0.0, f64::max)
}

fn max_edge(vertices: &[[f64; 2]], triangles: &[[usize; 3]]) -> f64 {
    triangles
        .iter()
        .map(|t| edge_scale(vertices, t))
        .fold(0.0, f64::max)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    (dx * dx + dy * dy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_zero_counts() {
        let m = Mesh::uniform(0).unwrap();
        assert_eq!(m.num_vertices(), 9);
        assert_eq!(m.num_triangles(), 8);
        assert_eq!(m.num_interior(), 1);
        assert!(!m.is_boundary()[4]);
    }

    #[test]
    fn level_two_counts() {
        let m = Mesh::uniform(2).unwrap();
        assert_eq!(m.num_vertices(), 81);
        assert_eq!(m.num_triangles(), 128);
        assert_eq!(m.num_interior(), 49);
    }

    #[test]
    fn invariants_across_levels() {
        let mut prev_h = None;
        for level in 0..6 {
            let m = Mesh::uniform(level).unwrap();
            let n = 1usize << (level + 1);
            assert!((m.total_area() - 1.0).abs() < 1e-12);
            assert!((0..m.num_triangles()).all(|t| m.area(t) > 0.0));
            assert_eq!(m.is_boundary().iter().filter(|&&b| b).count(), 4 * n);
            for (v, &b) in m.vertices().iter().zip(m.is_boundary()) {
                let on_edge = v[0] == 0.0 || v[0] == 1.0 || v[1] == 0.0 || v[1] == 1.0;
                assert_eq!(on_edge, b);
            }
            if let Some(p) = prev_h {
                assert_eq!(m.h(), p / 2.0);
            }
            prev_h = Some(m.h());
        }
    }

    #[test]
    fn edge_incidence_boundary_matches_coordinates() {
        let m = Mesh::uniform(3).unwrap();
        let rebuilt = Mesh::new(m.vertices().to_vec(), m.triangles().to_vec()).unwrap();
        assert_eq!(rebuilt.is_boundary(), m.is_boundary());
    }

    #[test]
    fn level_cap() {
        assert!(matches!(
            Mesh::uniform_with_cap(4, 3),
            Err(FemError::LevelTooLarge { level: 4, cap: 3 })
        ));
    }

    #[test]
    fn text_round_trip() {
        let m = Mesh::uniform(0).unwrap();
        let back = Mesh::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn clockwise_triangle_is_repaired() {
        let text = "v 0 0\nv 1 0\nv 0 1\nt 0 2 1\n";
        let m = Mesh::from_text(text).unwrap();
        assert!(m.area(0) > 0.0);
        assert!((m.area(0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dangling_index_reports_line() {
        let text = "# header\nv 0 0\nv 1 0\nv 0 1\n\nt 0 1 3\n";
        match Mesh::from_text(text) {
            Err(FemError::DanglingVertex { line, vertex, .. }) => {
                assert_eq!(line, Some(6));
                assert_eq!(vertex, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors_report_line() {
        let err = Mesh::from_text("v 0 0\nv 1 zero\n").unwrap_err();
        assert!(matches!(err, FemError::MeshParse { line: 2, .. }));
        let err = Mesh::from_text("v 0 0\nq 1 2\n").unwrap_err();
        assert!(matches!(err, FemError::MeshParse { line: 2, .. }));
    }

    #[test]
    fn collinear_triangle_rejected() {
        let err = Mesh::from_text("v 0 0\nv 1 0\nv 2 0\nt 0 1 2\n").unwrap_err();
        assert!(matches!(err, FemError::DegenerateTriangle { line: Some(4), .. }));
    }
}
