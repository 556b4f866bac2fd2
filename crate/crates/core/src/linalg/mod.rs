//! Matrix-free linear algebra: conjugate gradient, Laplacian pseudoinverse
//! solves, and the semismooth Newton Hessian.

mod cg;

pub use cg::{cg_solve, cg_solve_with, CgOptions, CgOutcome};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use nalgebra::{DMatrix, DVector};

pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `out ← A x`. Both slices have length [`dim`](Self::dim).
    fn apply(&self, x: &[f64], out: &mut [f64]);
    fn is_symmetric(&self) -> bool {
        true
    }
}

pub(crate) fn project_mean_zero(x: &mut [f64]) {
    if x.is_empty() {
        return;
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

pub struct DenseOperator {
    m: DMatrix<f64>,
}

impl DenseOperator {
    pub fn new(m: DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "dense operator must be square");
        Self { m }
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.m.nrows()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let y = &self.m * DVector::from_column_slice(x);
        out.copy_from_slice(y.as_slice());
    }

    fn is_symmetric(&self) -> bool {
        self.m == self.m.transpose()
    }
}

/// The weighted Laplacian `L = B W Bᵀ` of a graph.
pub struct LaplacianOperator<'g> {
    graph: &'g WeightedGraph,
}

impl<'g> LaplacianOperator<'g> {
    pub fn new(graph: &'g WeightedGraph) -> Self {
        Self { graph }
    }
}

impl LinearOperator for LaplacianOperator<'_> {
    fn dim(&self) -> usize {
        self.graph.node_count()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.graph.laplacian_apply_into(x, out);
    }
}

/// Mean-zero solution of `Lx = b` on a connected graph, i.e. `L†b`.
pub fn laplacian_pinv_apply(g: &WeightedGraph, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = g.node_count();
    Error::check_len(n, b.len())?;
    g.require_connected()?;
    let sum: f64 = b.iter().sum();
    let scale: f64 = b.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
    if sum.abs() > 1e-10 * scale {
        return Err(Error::NotMeanZero { sum });
    }
    let jacobi = g.degrees().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let opts = CgOptions { tol, max_iter: (20 * n).max(1000), deflate_constant: true, jacobi: Some(jacobi) };
    let out = cg_solve_with(&LaplacianOperator::new(g), b, &opts)?;
    if !out.converged {
        return Err(Error::NotConverged { iterations: out.iterations, residual: out.residual });
    }
    let mut x = out.x;
    project_mean_zero(&mut x);
    Ok(x)
}

/// `H = σ₁ B (I − D) Bᵀ + σ₂ r rᵀ + εI` where `D = diag(d) + β a aᵀ` is a
/// generalized Jacobian of the edge prox and `B` is the unweighted incidence
/// matrix.
#[derive(Debug, Clone)]
pub struct HessianOperator<'g> {
    graph: &'g WeightedGraph,
    diag: Vec<f64>,
    rank_one: Option<(f64, Vec<f64>)>,
    r: Vec<f64>,
    sigma1: f64,
    sigma2: f64,
    shift: f64,
}

impl<'g> HessianOperator<'g> {
    pub fn new(graph: &'g WeightedGraph, diag: Vec<f64>, r: Vec<f64>, sigma1: f64, sigma2: f64) -> Result<Self> {
        Error::check_len(graph.edge_count(), diag.len())?;
        Error::check_len(graph.node_count(), r.len())?;
        Ok(Self { graph, diag, rank_one: None, r, sigma1, sigma2, shift: 0.0 })
    }

    pub fn with_rank_one(mut self, beta: f64, a: Vec<f64>) -> Result<Self> {
        Error::check_len(self.graph.edge_count(), a.len())?;
        self.rank_one = Some((beta, a));
        Ok(self)
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    /// Checked matvec.
    pub fn hessian_apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.dim(), x.len())?;
        let mut out = vec![0.0; x.len()];
        self.apply(x, &mut out);
        Ok(out)
    }

    /// Diagonal of `H`, for Jacobi preconditioning.
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.graph.node_count();
        let mut d: Vec<f64> = (0..n).map(|i| self.sigma2 * self.r[i] * self.r[i] + self.shift).collect();
        for (e, edge) in self.graph.edges().iter().enumerate() {
            let c = self.sigma1 * (1.0 - self.diag[e]);
            d[edge.i] += c;
            d[edge.j] += c;
        }
        if let Some((beta, a)) = &self.rank_one {
            let mut ba = vec![0.0; n];
            self.graph.incidence_into(a, &mut ba);
            for (di, v) in d.iter_mut().zip(&ba) {
                *di -= self.sigma1 * beta * v * v;
            }
        }
        d
    }
}

impl LinearOperator for HessianOperator<'_> {
    fn dim(&self) -> usize {
        self.graph.node_count()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let rx: f64 = self.r.iter().zip(x).map(|(a, b)| a * b).sum();
        for i in 0..out.len() {
            out[i] = self.sigma2 * rx * self.r[i] + self.shift * x[i];
        }
        let proj = self.rank_one.as_ref().map(|(beta, a)| {
            let at: f64 = self.graph.edges().iter().zip(a).map(|(e, ae)| ae * (x[e.i] - x[e.j])).sum();
            (beta * at, a)
        });
        for (k, e) in self.graph.edges().iter().enumerate() {
            let mut g = (1.0 - self.diag[k]) * (x[e.i] - x[e.j]);
            if let Some((c, a)) = proj {
                g -= c * a[k];
            }
            g *= self.sigma1;
            out[e.i] += g;
            out[e.j] -= g;
        }
    }
}
