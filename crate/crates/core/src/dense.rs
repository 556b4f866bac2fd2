//! Dense linear algebra on small graphs: assembled Laplacians and their
//! eigendecomposition. Used by the spectral heat-diffusion route and by the
//! validation oracles; nothing here touches the iterative solvers.

use crate::graph::WeightedGraph;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub fn laplacian_matrix(g: &WeightedGraph) -> DMatrix<f64> {
    weighted_laplacian(g, |w| w)
}

/// Laplacian with every edge weight replaced by `map(w)`.
pub fn weighted_laplacian(g: &WeightedGraph, map: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = g.node_count();
    let mut l = DMatrix::zeros(n, n);
    for e in g.edges() {
        let w = map(e.w);
        l[(e.i, e.i)] += w;
        l[(e.j, e.j)] += w;
        l[(e.i, e.j)] -= w;
        l[(e.j, e.i)] -= w;
    }
    l
}

/// Node-edge incidence matrix (`+1` at the lower endpoint).
pub fn incidence_matrix(g: &WeightedGraph) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(g.node_count(), g.edge_count());
    for (k, e) in g.edges().iter().enumerate() {
        b[(e.i, k)] = 1.0;
        b[(e.j, k)] = -1.0;
    }
    b
}

/// Eigendecomposition of a symmetric positive semidefinite matrix with the
/// eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn of(m: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        Self { values, vectors }
    }

    /// Threshold below which an eigenvalue counts as zero.
    pub fn null_tolerance(&self) -> f64 {
        let top = self.values.iter().cloned().fold(0.0, f64::max);
        1e-10 * top.max(1.0)
    }

    /// Applies `f(λ)` spectrally to `x`.
    pub fn apply(&self, x: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        let x = DVector::from_column_slice(x);
        let mut coeffs = self.vectors.tr_mul(&x);
        for (c, &lam) in coeffs.iter_mut().zip(&self.values) {
            *c *= f(lam);
        }
        (&self.vectors * coeffs).as_slice().to_vec()
    }

    /// Moore-Penrose pseudoinverse applied to `x`.
    pub fn pinv_apply(&self, x: &[f64]) -> Vec<f64> {
        let tol = self.null_tolerance();
        self.apply(x, |lam| if lam > tol { 1.0 / lam } else { 0.0 })
    }

    pub fn pinv(&self) -> DMatrix<f64> {
        let tol = self.null_tolerance();
        let diag = DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&l| if l > tol { 1.0 / l } else { 0.0 }),
        );
        &self.vectors * DMatrix::from_diagonal(&diag) * self.vectors.transpose()
    }

    /// Smallest eigenvalue above the null tolerance (the spectral gap of a
    /// connected graph Laplacian).
    pub fn smallest_positive(&self) -> Option<f64> {
        let tol = self.null_tolerance();
        self.values.iter().cloned().find(|&l| l > tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_pseudoinverse() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = Spectrum::of(laplacian_matrix(&g));
        let x = s.pinv_apply(&[1.0, 0.0, -1.0]);
        for (a, b) in x.iter().zip([1.0, 0.0, -1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((s.smallest_positive().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incidence_reproduces_laplacian() {
        let g = WeightedGraph::new(4, [(0, 1, 2.0), (1, 2, 0.5), (0, 3, 1.0)]).unwrap();
        let b = incidence_matrix(&g);
        let w = DMatrix::from_diagonal(&DVector::from_vec(g.weights()));
        let l = &b * w * b.transpose();
        assert!((l - laplacian_matrix(&g)).norm() < 1e-14);
    }
}
