use super::{admm_solve, conductance_objective, solve_p2_signed, ssnal_solve, AdmmConfig, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::project_mean_zero;
use crate::measures::SignedMeasureMatrix;
use nalgebra::DMatrix;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMethod {
    /// Closed form for `p = 2`, SSNAL otherwise.
    #[default]
    Auto,
    ClosedForm,
    Ssnal,
    Admm,
}

/// Mean-centered potentials `Φ` (one column per class) with per-column
/// conductances.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    values: DMatrix<f64>,
    conductances: Vec<f64>,
    p: f64,
    iterations: Vec<usize>,
    residuals: Vec<(f64, f64)>,
    converged: bool,
}

impl Potential {
    /// Wraps externally computed potentials (no solver metadata).
    pub fn from_matrix(values: DMatrix<f64>, p: f64) -> Self {
        let k = values.ncols();
        Self { values, conductances: vec![f64::NAN; k], p, iterations: vec![0; k], residuals: vec![(0.0, 0.0); k], converged: true }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column(&self, class: usize) -> &[f64] {
        let n = self.values.nrows();
        &self.values.as_slice()[class * n..(class + 1) * n]
    }

    pub fn conductances(&self) -> &[f64] {
        &self.conductances
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn iterations(&self) -> &[usize] {
        &self.iterations
    }

    /// Final `(η₁, η₂)` per column; zero for the closed form.
    pub fn residuals(&self) -> &[(f64, f64)] {
        &self.residuals
    }

    pub fn converged(&self) -> bool {
        self.converged
    }
}

struct Column {
    phi: Vec<f64>,
    conductance: f64,
    iterations: usize,
    residuals: (f64, f64),
    converged: bool,
}

fn solve_column(g: &WeightedGraph, r: &[f64], p: f64, method: SolveMethod, cfg: &SolverConfig) -> Result<Column> {
    let method = match method {
        SolveMethod::Auto if p == 2.0 => SolveMethod::ClosedForm,
        SolveMethod::Auto => SolveMethod::Ssnal,
        m => m,
    };
    let mut col = match method {
        SolveMethod::ClosedForm => {
            if p != 2.0 {
                return Err(Error::param(format!("the closed form needs p = 2, got {p}")));
            }
            let (phi, c) = solve_p2_signed(g, r, 1e-12)?;
            Column { phi, conductance: c, iterations: 0, residuals: (0.0, 0.0), converged: true }
        }
        SolveMethod::Ssnal | SolveMethod::Auto => {
            let st = ssnal_solve(g, r, p, cfg)?;
            Column {
                conductance: st.objective(g, r),
                iterations: st.iterations(),
                residuals: st.final_residuals(),
                converged: st.converged,
                phi: st.phi,
            }
        }
        SolveMethod::Admm => {
            let st = admm_solve(g, r, p, &AdmmConfig { tol: cfg.tol, ..Default::default() })?;
            Column {
                conductance: conductance_objective(g, p, &st.phi, r),
                iterations: st.iterations(),
                residuals: st.final_residuals(),
                converged: st.converged,
                phi: st.phi,
            }
        }
    };
    project_mean_zero(&mut col.phi);
    Ok(col)
}

/// Solves each column of `R` independently (the constraint
/// `diag(ΦᵀR) = 1` decouples), in parallel.
pub fn solve_multiclass(g: &WeightedGraph, r: &SignedMeasureMatrix, p: f64, method: SolveMethod, cfg: &SolverConfig) -> Result<Potential> {
    Error::check_len(g.node_count(), r.node_count())?;
    let k = r.class_count();
    let cols: Vec<Column> =
        (0..k).into_par_iter().map(|c| solve_column(g, r.column(c), p, method, cfg)).collect::<Result<_>>()?;
    let n = g.node_count();
    let values = DMatrix::from_fn(n, k, |i, c| cols[c].phi[i]);
    Ok(Potential {
        values,
        conductances: cols.iter().map(|c| c.conductance).collect(),
        p,
        iterations: cols.iter().map(|c| c.iterations).collect(),
        residuals: cols.iter().map(|c| c.residuals).collect(),
        converged: cols.iter().all(|c| c.converged),
    })
}
