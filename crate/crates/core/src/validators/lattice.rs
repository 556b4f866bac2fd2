use crate::error::Result;
use crate::graph::WeightedGraph;
use crate::solvers::{admm_solve, ssnal_solve, AdmmConfig, SolverConfig, SolverState, TraceRow};
use std::io::Write;

pub const LATTICE_SIDE: usize = 20;

/// SSNAL and ADMM traces on the 20×20 unit lattice with Dirac measures at
/// opposite corners.
#[derive(Debug, Clone)]
pub struct LatticeBenchmark {
    pub p: f64,
    pub tol: f64,
    pub ssnal: SolverState,
    /// `None` for `p = ∞`, where the ADMM splitting has no scalar prox.
    pub admm: Option<SolverState>,
    /// `‖Bᵀφ − u‖` at the final SSNAL iterate.
    pub feasibility: f64,
    /// `‖u‖` at the final SSNAL iterate.
    pub u_norm: f64,
}

impl LatticeBenchmark {
    pub fn ssnal_iterations(&self) -> usize {
        self.ssnal.iterations()
    }

    pub fn admm_iterations(&self) -> Option<usize> {
        self.admm.as_ref().map(SolverState::iterations)
    }

    /// `‖Bᵀφ − u‖ ≤ tol (1 + ‖u‖)`.
    pub fn feasible(&self) -> bool {
        self.feasibility <= self.tol * (1.0 + self.u_norm)
    }
}

pub fn lattice_instance() -> (WeightedGraph, Vec<f64>) {
    let g = WeightedGraph::lattice(LATTICE_SIDE, LATTICE_SIDE);
    let n = g.node_count();
    let mut r = vec![0.0; n];
    r[0] = 1.0;
    r[n - 1] = -1.0;
    (g, r)
}

pub fn lattice_benchmark(p: f64, tol: f64) -> Result<LatticeBenchmark> {
    let (g, r) = lattice_instance();
    let ssnal = ssnal_solve(&g, &r, p, &SolverConfig { tol, ..Default::default() })?;
    let admm = if p.is_finite() { Some(admm_solve(&g, &r, p, &AdmmConfig { tol, ..Default::default() })?) } else { None };
    let bt = g.incidence_apply_t(&ssnal.phi)?;
    let feasibility = bt.iter().zip(&ssnal.u).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let u_norm = ssnal.u.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(LatticeBenchmark { p, tol, ssnal, admm, feasibility, u_norm })
}

fn write_rows(out: &mut impl Write, method: &str, trace: &[TraceRow]) -> std::io::Result<()> {
    for t in trace {
        writeln!(out, "{method},{},{},{:e},{:e},{:e},{}", t.outer_iter, t.inner_iters, t.eta1, t.eta2, t.eta1 + t.eta2, t.objective)?;
    }
    Ok(())
}

/// `method,iter,inner_iters,eta1,eta2,kkt,objective` with `kkt = η₁ + η₂`.
pub fn write_lattice_csv(mut out: impl Write, bench: &LatticeBenchmark) -> std::io::Result<()> {
    writeln!(out, "method,iter,inner_iters,eta1,eta2,kkt,objective")?;
    write_rows(&mut out, "ssnal", &bench.ssnal.trace)?;
    if let Some(admm) = &bench.admm {
        write_rows(&mut out, "admm", &admm.trace)?;
    }
    Ok(())
}
