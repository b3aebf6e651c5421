use crate::error::{FemError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementMatrices {
    pub mass: [[f64; 3]; 3],
    pub stiffness: [[f64; 3]; 3],
    pub area: f64,
}

/// Constant gradients of the three barycentric coordinates, and the signed area.
pub fn barycentric_gradients(coords: &[[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let [p0, p1, p2] = *coords;
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let grads = [
        [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
        [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
        [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
    ];
    (grads, 0.5 * det)
}

/// P1 mass and stiffness matrices of one triangle.
pub fn element_matrices(coords: &[[f64; 2]; 3]) -> Result<ElementMatrices> {
    let (grads, area) = barycentric_gradients(coords);
    if !(area > 0.0) {
        return Err(FemError::DegenerateTriangle { index: 0, line: None, area });
    }
    let mut mass = [[area / 12.0; 3]; 3];
    let mut stiffness = [[0.0; 3]; 3];
    for i in 0..3 {
        mass[i][i] = area / 6.0;
        for j in 0..3 {
            stiffness[i][j] = area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
        }
    }
    Ok(ElementMatrices { mass, stiffness, area })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_triangle() {
        let e = element_matrices(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let k = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        let (d, o) = (1.0 / 12.0, 1.0 / 24.0);
        let m = [[d, o, o], [o, d, o], [o, o, d]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((e.stiffness[i][j] - k[i][j]).abs() <= 1e-14);
                assert!((e.mass[i][j] - m[i][j]).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn translation_invariance_and_row_sums() {
        let base = [[0.1, 0.2], [1.3, 0.4], [0.5, 1.7]];
        let e0 = element_matrices(&base).unwrap();
        let shifted = base.map(|p| [p[0] + 3.5, p[1] - 2.25]);
        let e1 = element_matrices(&shifted).unwrap();
        for i in 0..3 {
            let row_sum: f64 = e0.stiffness[i].iter().sum();
            assert!(row_sum.abs() < 1e-14);
            for j in 0..3 {
                assert!((e0.stiffness[i][j] - e1.stiffness[i][j]).abs() < 1e-12);
                assert!((e0.mass[i][j] - e1.mass[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn clockwise_rejected() {
        assert!(element_matrices(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
        assert!(element_matrices(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).is_err());
    }
}
