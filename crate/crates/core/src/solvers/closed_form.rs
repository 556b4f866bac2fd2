use super::check_signed_measure;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::laplacian_pinv_apply;
use crate::measures::NodeMeasure;

/// `φ* = L†r / (rᵀL†r)` and `C₂ = (rᵀL†r)^{−1/2}` for a mean-zero `r`.
pub fn solve_p2_signed(g: &WeightedGraph, r: &[f64], tol: f64) -> Result<(Vec<f64>, f64)> {
    check_signed_measure(g, r)?;
    let x = laplacian_pinv_apply(g, r, tol)?;
    let resistance: f64 = x.iter().zip(r).map(|(a, b)| a * b).sum();
    if !(resistance > 0.0) {
        return Err(Error::ZeroMeasure);
    }
    let phi = x.iter().map(|v| v / resistance).collect();
    Ok((phi, resistance.sqrt().recip()))
}

pub fn solve_p2_closed_form(g: &WeightedGraph, mu: &NodeMeasure, nu: &NodeMeasure, tol: f64) -> Result<(Vec<f64>, f64)> {
    Error::check_len(g.node_count(), mu.values().len())?;
    Error::check_len(g.node_count(), nu.values().len())?;
    solve_p2_signed(g, &mu.minus(nu), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{laplacian_matrix, Spectrum};
    use crate::solvers::conductance_objective;
    use crate::validators::random_connected_graph;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_edge() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let (phi, c) = solve_p2_closed_form(&g, &NodeMeasure::dirac(2, 0), &NodeMeasure::dirac(2, 1), 1e-14).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
        assert!((phi[0] - 0.5).abs() < 1e-12 && (phi[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn series_path() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let (phi, c) = solve_p2_closed_form(&g, &NodeMeasure::dirac(3, 0), &NodeMeasure::dirac(3, 2), 1e-14).unwrap();
        assert!((c - 0.5f64.sqrt()).abs() < 1e-12);
        for (a, b) in phi.iter().zip([0.5, 0.0, -0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_measures_rejected() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let mu = NodeMeasure::dirac(2, 0);
        assert!(matches!(solve_p2_closed_form(&g, &mu, &mu, 1e-12), Err(Error::ZeroMeasure)));
    }

    #[test]
    fn random_graphs_match_dense_resistance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let g = random_connected_graph(&mut rng, 12, 0.25);
            let mu = NodeMeasure::new((0..12).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap().normalized().unwrap();
            let nu = NodeMeasure::dirac(12, rng.random_range(0..12));
            let (phi, c) = solve_p2_closed_form(&g, &mu, &nu, 1e-14).unwrap();
            let r = mu.minus(&nu);
            let lr = Spectrum::of(laplacian_matrix(&g)).pinv_apply(&r);
            let resistance: f64 = lr.iter().zip(&r).map(|(a, b)| a * b).sum();
            assert!((c * c * resistance - 1.0).abs() < 1e-8);
            assert!((phi.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() - 1.0).abs() < 1e-8);
            assert!((conductance_objective(&g, 2.0, &phi, &r) - c).abs() < 1e-8);
        }
    }
}
