use crate::dense::{laplacian_matrix, Spectrum};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::measures::NodeMeasure;

/// Dense limit for the spectral robustness check.
pub const ROBUSTNESS_MAX_NODES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessRow {
    pub t: f64,
    /// `‖L†(μ − ν) − L†e^{−tL}(μ − ν + η)‖₂`.
    pub lhs: f64,
    /// `t‖μ − ν‖₂ + λ⁻¹e^{−tλ}‖η‖₂`.
    pub rhs: f64,
    /// `‖η‖₂ / λ`, the bound without diffusion.
    pub baseline: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessTable {
    /// Smallest positive Laplacian eigenvalue.
    pub lambda: f64,
    pub measure_norm: f64,
    pub noise_norm: f64,
    pub rows: Vec<RobustnessRow>,
}

impl RobustnessTable {
    /// `(0, λ⁻¹(‖η‖/‖μ − ν‖ − 1))` when `‖η‖ > ‖μ − ν‖`.
    pub fn improvement_interval(&self) -> Option<(f64, f64)> {
        let ratio = self.noise_norm / self.measure_norm;
        (ratio > 1.0).then(|| (0.0, (ratio - 1.0) / self.lambda))
    }

    /// Rows where `lhs > rhs + slack`.
    pub fn violations(&self, slack: f64) -> usize {
        self.rows.iter().filter(|r| r.lhs > r.rhs + slack).count()
    }

    /// Every grid point strictly inside the improvement interval has
    /// `rhs < baseline`. Vacuously true without an interval.
    pub fn improvement_holds(&self) -> bool {
        match self.improvement_interval() {
            None => true,
            Some((lo, hi)) => self.rows.iter().filter(|r| r.t > lo && r.t < hi).all(|r| r.rhs < r.baseline),
        }
    }
}

pub fn robustness_bound_check(g: &WeightedGraph, mu: &NodeMeasure, nu: &NodeMeasure, eta: &[f64], t_grid: &[f64]) -> Result<RobustnessTable> {
    let n = g.node_count();
    if n > ROBUSTNESS_MAX_NODES {
        return Err(Error::TooLarge(format!("robustness check handles n ≤ {ROBUSTNESS_MAX_NODES}, got {n}")));
    }
    g.require_connected()?;
    Error::check_len(n, mu.values().len())?;
    Error::check_len(n, nu.values().len())?;
    Error::check_len(n, eta.len())?;
    let sum: f64 = eta.iter().sum();
    if sum.abs() > 1e-10 * (1.0 + eta.iter().map(|v| v.abs()).sum::<f64>()) {
        return Err(Error::NotMeanZero { sum });
    }
    if let Some(t) = t_grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::param(format!("diffusion times must be nonnegative, got {t}")));
    }
    let spectrum = Spectrum::of(laplacian_matrix(g));
    let lambda = spectrum.smallest_positive().ok_or(Error::Disconnected { components: n })?;
    let r = mu.minus(nu);
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (measure_norm, noise_norm) = (norm(&r), norm(eta));
    let psi = spectrum.pinv_apply(&r);
    let noisy: Vec<f64> = r.iter().zip(eta).map(|(a, b)| a + b).collect();
    let tol = spectrum.null_tolerance();
    let rows = t_grid
        .iter()
        .map(|&t| {
            let diffused = spectrum.apply(&noisy, |l| if l > tol { (-t * l).exp() / l } else { 0.0 });
            let lhs = norm(&psi.iter().zip(&diffused).map(|(a, b)| a - b).collect::<Vec<_>>());
            let rhs = t * measure_norm + (-t * lambda).exp() * noise_norm / lambda;
            RobustnessRow { t, lhs, rhs, baseline: noise_norm / lambda }
        })
        .collect();
    Ok(RobustnessTable { lambda, measure_norm, noise_norm, rows })
}

/// Two classes of `m` labels each (`a`, `b`), with `a_flipped ⊆ a` and
/// `b_flipped ⊆ b` relabeled to the other class. Returns clean `(μ, ν)` and
/// the perturbation `η = 2(1_{b'} − 1_{a'})/m` of `μ − ν`. The flip counts
/// must match for `η` to be mean-zero.
pub fn label_flip_perturbation(n: usize, a: &[usize], b: &[usize], a_flipped: &[usize], b_flipped: &[usize]) -> Result<(NodeMeasure, NodeMeasure, Vec<f64>)> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::param("both classes need the same positive number of labels"));
    }
    if a_flipped.len() != b_flipped.len() {
        return Err(Error::param("flip counts must match for a mean-zero perturbation"));
    }
    if !a_flipped.iter().all(|v| a.contains(v)) || !b_flipped.iter().all(|v| b.contains(v)) {
        return Err(Error::param("flipped labels must come from their own class"));
    }
    let m = a.len() as f64;
    let mu = NodeMeasure::uniform_on(n, a)?;
    let nu = NodeMeasure::uniform_on(n, b)?;
    let mut eta = vec![0.0; n];
    for &v in b_flipped {
        eta[v] += 2.0 / m;
    }
    for &v in a_flipped {
        eta[v] -= 2.0 / m;
    }
    Ok((mu, nu, eta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> WeightedGraph {
        WeightedGraph::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0))).unwrap()
    }

    #[test]
    fn zero_time_and_zero_noise() {
        let g = cycle(8);
        let (mu, nu) = (NodeMeasure::dirac(8, 0), NodeMeasure::dirac(8, 4));
        let mut eta = vec![0.0; 8];
        eta[1] = 0.3;
        eta[5] = -0.3;
        let table = robustness_bound_check(&g, &mu, &nu, &eta, &[0.0, 0.5]).unwrap();
        assert_eq!(table.rows[0].rhs, table.rows[0].baseline);
        assert!(table.violations(1e-12) == 0);

        let table = robustness_bound_check(&g, &mu, &nu, &[0.0; 8], &[0.0, 0.1, 1.0, 10.0]).unwrap();
        for row in &table.rows {
            assert!(row.lhs <= row.t * table.measure_norm + 1e-12);
        }
    }

    #[test]
    fn quarter_corruption_opens_the_interval() {
        let g = cycle(12);
        let (a, b) = ([0, 1, 2, 3], [6, 7, 8, 9]);
        // m = 4: flipping m₁ + m₂ = 2 is exactly half, not enough; 4 is.
        let (mu, nu, eta) = label_flip_perturbation(12, &a, &b, &[0], &[6]).unwrap();
        let table = robustness_bound_check(&g, &mu, &nu, &eta, &[0.0]).unwrap();
        assert!((table.noise_norm / table.measure_norm - 1.0).abs() < 1e-12);
        assert!(table.improvement_interval().is_none());

        let (mu, nu, eta) = label_flip_perturbation(12, &a, &b, &[0, 1], &[6, 7]).unwrap();
        let grid: Vec<f64> = (0..200).map(|k| k as f64 * 0.01).collect();
        let table = robustness_bound_check(&g, &mu, &nu, &eta, &grid).unwrap();
        assert!(table.improvement_interval().is_some());
        assert!(table.improvement_holds());
        assert_eq!(table.violations(1e-9), 0);
    }

    #[test]
    fn rejects_bad_noise() {
        assert!(label_flip_perturbation(12, &[0, 1], &[5, 6], &[0], &[]).is_err());
        let g = cycle(5);
        let (mu, nu) = (NodeMeasure::dirac(5, 0), NodeMeasure::dirac(5, 2));
        assert!(robustness_bound_check(&g, &mu, &nu, &[1.0, 0.0, 0.0, 0.0, 0.0], &[0.0]).is_err());
        assert!(robustness_bound_check(&g, &mu, &nu, &[0.0; 5], &[-1.0]).is_err());
    }
}
