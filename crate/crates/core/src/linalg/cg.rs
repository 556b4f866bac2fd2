use super::{project_mean_zero, LinearOperator};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CgOptions {
    /// Relative residual target `‖Ax − b‖ ≤ tol · ‖b‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Work in the orthogonal complement of the constant vector.
    pub deflate_constant: bool,
    /// Inverse diagonal preconditioner.
    pub jacobi: Option<Vec<f64>>,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 1000, deflate_constant: false, jacobi: None }
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual `‖Ax − b‖ / ‖b‖`.
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cg_solve(a: &dyn LinearOperator, b: &[f64], tol: f64, max_iter: usize) -> Result<CgOutcome> {
    cg_solve_with(a, b, &CgOptions { tol, max_iter, ..CgOptions::default() })
}

/// Preconditioned conjugate gradient from a zero initial guess.
pub fn cg_solve_with(a: &dyn LinearOperator, b: &[f64], opts: &CgOptions) -> Result<CgOutcome> {
    let n = a.dim();
    Error::check_len(n, b.len())?;
    if let Some(m) = &opts.jacobi {
        Error::check_len(n, m.len())?;
    }
    let mut r = b.to_vec();
    if opts.deflate_constant {
        project_mean_zero(&mut r);
    }
    let b_norm = dot(&r, &r).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(CgOutcome { x, iterations: 0, residual: 0.0, converged: true });
    }
    let precondition = |r: &[f64], z: &mut Vec<f64>| {
        z.clear();
        match &opts.jacobi {
            Some(m) => z.extend(r.iter().zip(m).map(|(ri, mi)| ri * mi)),
            None => z.extend_from_slice(r),
        }
        if opts.deflate_constant {
            project_mean_zero(z);
        }
    };
    let mut z = Vec::with_capacity(n);
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = 1.0;
    for it in 0..opts.max_iter {
        a.apply(&p, &mut ap);
        if opts.deflate_constant {
            project_mean_zero(&mut ap);
        }
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(Error::CgBreakdown { iteration: it, curvature, iterate: x });
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt() / b_norm;
        if res <= opts.tol {
            return Ok(CgOutcome { x, iterations: it + 1, residual: res, converged: true });
        }
        precondition(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(CgOutcome { x, iterations: opts.max_iter, residual: res, converged: false })
}
