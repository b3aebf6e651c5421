use super::{dot, norm2, CsrMatrix};
use crate::error::{FemError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    None,
    #[default]
    Jacobi,
}

#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    /// Relative residual target ‖b − Ax‖/‖b‖.
    pub tol: f64,
    pub max_iter: usize,
    pub precond: Preconditioner,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions { tol: 1e-10, max_iter: 10_000, precond: Preconditioner::Jacobi }
    }
}

impl CgOptions {
    pub fn with_tol(tol: f64) -> Self {
        CgOptions { tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final relative residual, recomputed from the returned iterate.
    pub residual_norm: f64,
    pub converged: bool,
}

/// Solves A x = b from a zero initial guess.
pub fn cg_solve(a: &CsrMatrix, b: &[f64], opts: &CgOptions) -> Result<(Vec<f64>, SolveReport)> {
    let mut x = vec![0.0; b.len()];
    let report = cg_solve_into(a, b, &mut x, opts)?;
    Ok((x, report))
}

/// Preconditioned conjugate gradient, warm-started from the contents of `x`.
///
/// Non-convergence is reported through [`SolveReport::converged`], not as an error.
pub fn cg_solve_into(a: &CsrMatrix, b: &[f64], x: &mut [f64], opts: &CgOptions) -> Result<SolveReport> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(FemError::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if b.len() != n {
        return Err(FemError::DimensionMismatch { expected: n, got: b.len() });
    }
    if x.len() != n {
        return Err(FemError::DimensionMismatch { expected: n, got: x.len() });
    }

    let b_norm = norm2(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveReport { iterations: 0, residual_norm: 0.0, converged: true });
    }

    let inv_diag: Vec<f64> = match opts.precond {
        Preconditioner::None => vec![1.0; n],
        Preconditioner::Jacobi => a
            .diagonal()
            .into_iter()
            .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
            .collect(),
    };

    let target = opts.tol * b_norm;
    // The recursive residual keeps shrinking past what the true residual can
    // reach; stop there and let the restart check the true residual.
    let inner_target = target.max(1e-3 * f64::EPSILON * b_norm);
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut iterations = 0;

    // Outer loop restarts from the true residual if the recursive one drifted.
    loop {
        a.mul_vec_into(x, &mut q)?;
        for i in 0..n {
            r[i] = b[i] - q[i];
        }
        let true_res = norm2(&r);
        if true_res <= target {
            return Ok(SolveReport { iterations, residual_norm: true_res / b_norm, converged: true });
        }
        if iterations >= opts.max_iter {
            return Ok(SolveReport { iterations, residual_norm: true_res / b_norm, converged: false });
        }

        for i in 0..n {
            z[i] = inv_diag[i] * r[i];
        }
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);

        while iterations < opts.max_iter {
            a.mul_vec_into(&p, &mut q)?;
            let pq = dot(&p, &q);
            if !(pq > 0.0) {
                // Breakdown: the search direction vanished at rounding level.
                return finish(a, b, x, &mut q, b_norm, target, iterations);
            }
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            iterations += 1;
            if norm2(&r) <= inner_target {
                break;
            }
            for i in 0..n {
                z[i] = inv_diag[i] * r[i];
            }
            let rz_new = dot(&r, &z);
            if !(rz_new > 0.0 && rz_new.is_finite()) {
                return finish(a, b, x, &mut q, b_norm, target, iterations);
            }
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        if iterations >= opts.max_iter {
            return finish(a, b, x, &mut q, b_norm, target, iterations);
        }
    }
}

fn finish(a: &CsrMatrix, b: &[f64], x: &[f64], q: &mut [f64], b_norm: f64, target: f64, iterations: usize) -> Result<SolveReport> {
    a.mul_vec_into(x, q)?;
    let res: f64 = b.iter().zip(q.iter()).map(|(bi, qi)| (bi - qi).powi(2)).sum::<f64>().sqrt();
    Ok(SolveReport { iterations, residual_norm: res / b_norm, converged: res <= target })
}
