use super::SolverState;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::prox::ProxSpec;

fn norm(a: impl Iterator<Item = f64>) -> f64 {
    a.map(|x| x * x).sum::<f64>().sqrt()
}

/// Relative KKT residuals
/// `η₁ = (‖Bᵀφ − u‖ + |φᵀr − 1|) / (1 + ‖u‖ + ‖r‖)` and
/// `η₂ = (‖Bz + y r‖ + ‖u − prox_{s/σ₁}(u + z/σ₁)‖) / (1 + ‖r‖ + ‖u‖)`.
pub fn kkt_residuals(g: &WeightedGraph, state: &SolverState, r: &[f64]) -> Result<(f64, f64)> {
    let (n, m) = (g.node_count(), g.edge_count());
    Error::check_len(n, state.phi.len())?;
    Error::check_len(n, r.len())?;
    Error::check_len(m, state.u.len())?;
    Error::check_len(m, state.z.len())?;
    let u_norm = norm(state.u.iter().cloned());
    let r_norm = norm(r.iter().cloned());
    let denom = 1.0 + u_norm + r_norm;

    let mut bt = vec![0.0; m];
    g.incidence_t_into(&state.phi, &mut bt);
    let feas = norm(bt.iter().zip(&state.u).map(|(a, b)| a - b));
    let constraint = state.phi.iter().zip(r).map(|(a, b)| a * b).sum::<f64>() - 1.0;
    let eta1 = (feas + constraint.abs()) / denom;

    let mut bz = vec![0.0; n];
    g.incidence_into(&state.z, &mut bz);
    let dual = norm(bz.iter().zip(r).map(|(a, b)| a + state.y * b));
    let spec = ProxSpec::new(state.p, g.weights(), 1.0 / state.sigma1)?;
    let shifted: Vec<f64> = state.u.iter().zip(&state.z).map(|(u, z)| u + z / state.sigma1).collect();
    let prox = spec.prox(&shifted)?;
    let comp = norm(state.u.iter().zip(&prox).map(|(a, b)| a - b));
    Ok((eta1, (dual + comp) / denom))
}
