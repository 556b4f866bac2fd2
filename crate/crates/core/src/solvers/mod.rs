//! Solvers for the p-conductance program
//! `min ‖Bᵀφ‖_{p,w}  s.t.  φᵀr = 1` and its one-vs-all k-class form.

mod admm;
mod closed_form;
mod kkt;
mod multiclass;
mod ssnal;

pub use admm::{admm_solve, admm_solve_detailed, AdmmConfig};
pub use closed_form::{solve_p2_closed_form, solve_p2_signed};
pub use kkt::kkt_residuals;
pub use multiclass::{solve_multiclass, Potential, SolveMethod};
pub use ssnal::{ssnal_solve, ssncg_inner, AugmentedSubproblem, InnerOutcome};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::prox::ProxSpec;
use std::io::Write;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Outer stopping tolerance on `max(η₁, η₂)`.
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub sigma_init: f64,
    pub sigma_max: f64,
    /// Armijo initial step, sufficient-decrease constant and backtracking factor.
    pub armijo_step: f64,
    pub armijo_sigma: f64,
    pub armijo_eta: f64,
    pub max_halvings: usize,
    /// Newton regularization `τ₁ min(τ₂, ‖∇f‖)`.
    pub tau1: f64,
    pub tau2: f64,
    pub cg_max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_outer: 200,
            max_inner: 50,
            sigma_init: 1.0,
            sigma_max: 1e6,
            armijo_step: 1.0,
            armijo_sigma: 1e-4,
            armijo_eta: 0.5,
            max_halvings: 50,
            tau1: 1e-2,
            tau2: 1.0,
            cg_max_iter: 500,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol", self.tol),
            ("sigma_init", self.sigma_init),
            ("sigma_max", self.sigma_max),
            ("armijo_step", self.armijo_step),
            ("armijo_sigma", self.armijo_sigma),
            ("tau1", self.tau1),
            ("tau2", self.tau2),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::param(format!("{name} must be positive, got {v}")));
        }
        if !(self.armijo_eta > 0.0 && self.armijo_eta < 1.0) {
            return Err(Error::param("armijo_eta must lie in (0, 1)"));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::param("iteration caps must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub outer_iter: usize,
    pub inner_iters: usize,
    pub eta1: f64,
    pub eta2: f64,
    pub objective: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

/// Primal-dual iterate of the augmented Lagrangian method.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub p: f64,
    pub phi: Vec<f64>,
    pub u: Vec<f64>,
    pub z: Vec<f64>,
    pub y: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
    /// Per outer iteration, `‖φ_t − φ̄‖` along the Newton iterates of the
    /// inner solve.
    pub newton_errors: Vec<Vec<f64>>,
}

impl SolverState {
    /// `‖Bᵀφ‖_{p,w} / φᵀr`, the conductance objective at the current iterate.
    pub fn objective(&self, g: &WeightedGraph, r: &[f64]) -> f64 {
        conductance_objective(g, self.p, &self.phi, r)
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn final_residuals(&self) -> (f64, f64) {
        self.trace.last().map_or((f64::INFINITY, f64::INFINITY), |t| (t.eta1, t.eta2))
    }
}

/// `‖Bᵀφ‖_{p,w} / φᵀr`; scale invariant in `φ`.
pub fn conductance_objective(g: &WeightedGraph, p: f64, phi: &[f64], r: &[f64]) -> f64 {
    let mut u = vec![0.0; g.edge_count()];
    g.incidence_t_into(phi, &mut u);
    let spec = ProxSpec::new(p, g.weights(), 1.0).expect("graph weights are positive");
    let dot: f64 = phi.iter().zip(r).map(|(a, b)| a * b).sum();
    spec.gauge(&u) / dot
}

pub(crate) fn check_signed_measure(g: &WeightedGraph, r: &[f64]) -> Result<()> {
    Error::check_len(g.node_count(), r.len())?;
    g.require_connected()?;
    let sum: f64 = r.iter().sum();
    let scale: f64 = r.iter().map(|v| v.abs()).sum();
    if scale == 0.0 {
        return Err(Error::ZeroMeasure);
    }
    if sum.abs() > 1e-10 * scale.max(1.0) {
        return Err(Error::NotMeanZero { sum });
    }
    Ok(())
}

pub fn write_trace_csv(mut out: impl Write, trace: &[TraceRow]) -> std::io::Result<()> {
    writeln!(out, "outer_iter,inner_iters,eta1,eta2,objective,sigma1,sigma2")?;
    for t in trace {
        writeln!(
            out,
            "{},{},{:e},{:e},{:.12e},{:e},{:e}",
            t.outer_iter, t.inner_iters, t.eta1, t.eta2, t.objective, t.sigma1, t.sigma2
        )?;
    }
    Ok(())
}
