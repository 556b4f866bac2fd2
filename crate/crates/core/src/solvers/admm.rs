use super::{check_signed_measure, conductance_objective, kkt_residuals, SolverState, TraceRow};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::{cg_solve_with, CgOptions, LaplacianOperator};
use crate::prox::prox_scalar;

#[derive(Debug, Clone)]
pub struct AdmmConfig {
    /// Penalty `ν`.
    pub nu: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Relative tolerance of the Laplacian solves.
    pub cg_tol: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self { nu: 1.0, tol: 1e-4, max_iter: 20_000, cg_tol: 1e-12 }
    }
}

struct LaplacianSolver<'g> {
    graph: &'g WeightedGraph,
    opts: CgOptions,
}

impl LaplacianSolver<'_> {
    fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, usize)> {
        let out = cg_solve_with(&LaplacianOperator::new(self.graph), b, &self.opts)?;
        if !out.converged {
            return Err(Error::NotConverged { iterations: out.iterations, residual: out.residual });
        }
        Ok((out.x, out.iterations))
    }
}

/// ADMM over oriented edges with auxiliary `v_ij = φ_i − φ_j` and
/// multipliers `λ_ij`:
///
/// 1. `v_ij = prox_{|·|^p/ν}(φ_i − φ_j − λ_ij/ν)`
/// 2. `Lφ = b − γr` with `b_i = ½ Σ_j w_ij (c_ij − c_ji)`, `c = v + λ/ν`,
///    and `γ` chosen so that `φᵀr = 1`
/// 3. `λ_ij += ν (v_ij − φ_i + φ_j)`
///
/// Returns the state in single-orientation form together with the largest
/// skew-symmetry defect `max |λ_ij + λ_ji|, |v_ij + v_ji|` seen.
pub fn admm_solve_detailed(g: &WeightedGraph, r: &[f64], p: f64, cfg: &AdmmConfig) -> Result<(SolverState, f64)> {
    check_signed_measure(g, r)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param(format!("ADMM needs a finite p ≥ 1, got {p}")));
    }
    if !(cfg.nu > 0.0 && cfg.tol > 0.0) {
        return Err(Error::param("ADMM penalty and tolerance must be positive"));
    }
    let (n, m) = (g.node_count(), g.edge_count());
    let solver = LaplacianSolver {
        graph: g,
        opts: CgOptions {
            tol: cfg.cg_tol,
            max_iter: (20 * n).max(1000),
            deflate_constant: true,
            jacobi: Some(g.degrees().iter().map(|d| 1.0 / d).collect()),
        },
    };
    let (q, _) = solver.solve(r)?;
    let rq: f64 = q.iter().zip(r).map(|(a, b)| a * b).sum();
    if !(rq > 0.0) {
        return Err(Error::ZeroMeasure);
    }

    let r_norm2: f64 = r.iter().map(|v| v * v).sum();
    let mut phi: Vec<f64> = r.iter().map(|v| v / r_norm2).collect();
    // Slot 2e is (i, j), slot 2e + 1 is (j, i).
    let mut v = vec![0.0; 2 * m];
    let mut lambda = vec![0.0; 2 * m];
    let mut state = SolverState {
        p,
        phi: phi.clone(),
        u: vec![0.0; m],
        z: vec![0.0; m],
        y: 0.0,
        sigma1: cfg.nu,
        sigma2: cfg.nu,
        trace: Vec::new(),
        converged: false,
        newton_errors: Vec::new(),
    };
    let mut skew: f64 = 0.0;
    let a = 1.0 / cfg.nu;
    for it in 0..cfg.max_iter {
        for (e, edge) in g.edges().iter().enumerate() {
            let d = phi[edge.i] - phi[edge.j];
            v[2 * e] = prox_scalar(d - lambda[2 * e] / cfg.nu, p, a)?;
            v[2 * e + 1] = prox_scalar(-d - lambda[2 * e + 1] / cfg.nu, p, a)?;
        }
        let mut b = vec![0.0; n];
        for (e, edge) in g.edges().iter().enumerate() {
            let c_ij = v[2 * e] + lambda[2 * e] / cfg.nu;
            let c_ji = v[2 * e + 1] + lambda[2 * e + 1] / cfg.nu;
            let flow = 0.5 * edge.w * (c_ij - c_ji);
            b[edge.i] += flow;
            b[edge.j] -= flow;
        }
        let (x, cg_iters) = solver.solve(&b)?;
        let bq: f64 = b.iter().zip(&q).map(|(a, b)| a * b).sum();
        let gamma = (bq - 1.0) / rq;
        for i in 0..n {
            phi[i] = x[i] - gamma * q[i];
        }
        for (e, edge) in g.edges().iter().enumerate() {
            let d = phi[edge.i] - phi[edge.j];
            lambda[2 * e] += cfg.nu * (v[2 * e] - d);
            lambda[2 * e + 1] += cfg.nu * (v[2 * e + 1] + d);
            skew = skew.max((lambda[2 * e] + lambda[2 * e + 1]).abs()).max((v[2 * e] + v[2 * e + 1]).abs());
        }

        // Map onto the single-orientation problem: u = v_ij, z = −w λ_ij, and
        // y as the least-squares fit of Bz + y r = 0.
        state.phi.copy_from_slice(&phi);
        for (e, edge) in g.edges().iter().enumerate() {
            state.u[e] = v[2 * e];
            state.z[e] = -edge.w * lambda[2 * e];
        }
        let mut bz = vec![0.0; n];
        g.incidence_into(&state.z, &mut bz);
        state.y = -bz.iter().zip(r).map(|(a, b)| a * b).sum::<f64>() / r_norm2;
        let (eta1, eta2) = kkt_residuals(g, &state, r)?;
        state.trace.push(TraceRow {
            outer_iter: it + 1,
            inner_iters: cg_iters,
            eta1,
            eta2,
            objective: conductance_objective(g, p, &phi, r),
            sigma1: cfg.nu,
            sigma2: cfg.nu,
        });
        if eta1.max(eta2) <= cfg.tol {
            state.converged = true;
            break;
        }
    }
    Ok((state, skew))
}

pub fn admm_solve(g: &WeightedGraph, r: &[f64], p: f64, cfg: &AdmmConfig) -> Result<SolverState> {
    Ok(admm_solve_detailed(g, r, p, cfg)?.0)
}
