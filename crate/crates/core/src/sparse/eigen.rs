use super::{cg_solve_into, dot, CgOptions, CsrMatrix};
use crate::error::{FemError, Result};

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    /// Normalized so that xᵀ M x = 1.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

const MAX_POWER_ITERS: usize = 1000;

/// Smallest eigenvalue of the pencil A x = λ M x.
pub fn smallest_generalized_eigenvalue(a: &CsrMatrix, m: &CsrMatrix, tol: f64) -> Result<f64> {
    inverse_power_iteration(a, m, tol).map(|p| p.value)
}

/// Inverse power iteration: x ← A⁻¹ M x, M-normalized, with Rayleigh-quotient
/// estimates. Stops when successive estimates agree to `tol` relative.
pub fn inverse_power_iteration(a: &CsrMatrix, m: &CsrMatrix, tol: f64) -> Result<EigenPair> {
    let n = a.nrows();
    if a.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(FemError::DimensionMismatch { expected: n, got: m.nrows() });
    }
    if n == 0 {
        return Err(FemError::DimensionMismatch { expected: 1, got: 0 });
    }
    // inner solves must be well below the eigenvalue tolerance
    let opts = CgOptions::with_tol((tol * 1e-3).clamp(1e-12, 1e-10));

    // positive start vector overlaps the (positive) ground state
    let mut x = vec![1.0; n];
    normalize_m(m, &mut x)?;
    let mut lambda = rayleigh(a, m, &x)?;
    let mut y = x.clone();

    for it in 1..=MAX_POWER_ITERS {
        let rhs = m.mul_vec(&x)?;
        let rep = cg_solve_into(a, &rhs, &mut y, &opts)?;
        if !rep.converged {
            return Err(FemError::NotConverged {
                what: "inner CG of inverse power iteration",
                iterations: rep.iterations,
                residual: rep.residual_norm,
            });
        }
        x.copy_from_slice(&y);
        normalize_m(m, &mut x)?;
        let next = rayleigh(a, m, &x)?;
        let change = (next - lambda).abs() / next.abs().max(f64::MIN_POSITIVE);
        lambda = next;
        if change <= tol {
            return Ok(EigenPair { value: lambda, vector: x, iterations: it });
        }
    }
    Err(FemError::NotConverged { what: "inverse power iteration", iterations: MAX_POWER_ITERS, residual: f64::NAN })
}

fn rayleigh(a: &CsrMatrix, m: &CsrMatrix, x: &[f64]) -> Result<f64> {
    Ok(a.inner(x, x)? / m.inner(x, x)?)
}

fn normalize_m(m: &CsrMatrix, x: &mut [f64]) -> Result<()> {
    let s = m.inner(x, x)?.sqrt();
    if !(s > 0.0) || !s.is_finite() {
        return Err(FemError::NotConverged { what: "inverse power iteration", iterations: 0, residual: s });
    }
    x.iter_mut().for_each(|v| *v /= s);
    debug_assert!((dot(x, &m.mul_vec(x)?) - 1.0).abs() < 1e-8);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_pencil() {
        let a = CsrMatrix::from_dense(&[vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]).unwrap();
        let lam = smallest_generalized_eigenvalue(&a, &a, 1e-12).unwrap();
        assert!((lam - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_by_one() {
        let a = CsrMatrix::from_dense(&[vec![4.0]]).unwrap();
        let m = CsrMatrix::from_dense(&[vec![0.125]]).unwrap();
        assert_eq!(smallest_generalized_eigenvalue(&a, &m, 1e-12).unwrap(), 32.0);
    }

    #[test]
    fn tridiagonal_known_spectrum() {
        // eigenvalues of tridiag(-1,2,-1) are 2 - 2cos(kπ/(n+1))
        let n = 20;
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            rows[i][i] = 2.0;
            if i + 1 < n {
                rows[i][i + 1] = -1.0;
                rows[i + 1][i] = -1.0;
            }
        }
        let a = CsrMatrix::from_dense(&rows).unwrap();
        let pair = inverse_power_iteration(&a, &CsrMatrix::identity(n), 1e-13).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((pair.value - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn mismatched_pencil() {
        let a = CsrMatrix::identity(3);
        let m = CsrMatrix::identity(2);
        assert!(smallest_generalized_eigenvalue(&a, &m, 1e-10).is_err());
    }
}
