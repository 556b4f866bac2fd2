use super::ORACLE_MAX_NODES;
use crate::assignment::simplex::{LinearProgram, Sense};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::measures::NodeMeasure;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Optimal values and certificates of the measure mincut LP and its
/// maxflow dual.
#[derive(Debug, Clone)]
pub struct MincutReport {
    pub mincut: f64,
    pub maxflow: f64,
    /// Mincut potentials `ψ` with `ψᵀ(μ − ν) = 1`.
    pub potentials: Vec<f64>,
    /// Maxflow edge flows, scaled so that `BJ = t(μ − ν)`.
    pub flow: Vec<f64>,
}

fn check_oracle_graph(g: &WeightedGraph, limit: usize) -> Result<()> {
    if g.node_count() > limit {
        return Err(Error::TooLarge(format!("oracle handles n ≤ {limit}, got {}", g.node_count())));
    }
    g.require_connected()
}

/// Solves `min Σ w|ψ_i − ψ_j| s.t. ψᵀ(μ − ν) = 1` and
/// `max t s.t. BJ = t(μ − ν), |J| ≤ w` as separate LPs.
pub fn mincut_maxflow_lp(g: &WeightedGraph, mu: &NodeMeasure, nu: &NodeMeasure) -> Result<MincutReport> {
    check_oracle_graph(g, ORACLE_MAX_NODES)?;
    Error::check_len(g.node_count(), mu.values().len())?;
    Error::check_len(g.node_count(), nu.values().len())?;
    let r = mu.minus(nu);
    if r.iter().all(|v| v.abs() <= 1e-15) {
        return Err(Error::ZeroMeasure);
    }
    let (n, m) = (g.node_count(), g.edge_count());

    // Variables [ψ⁺ (n) | ψ⁻ (n) | s (m)], s_e ≥ |ψ_i − ψ_j|.
    let mut cost = vec![0.0; 2 * n + m];
    for (k, e) in g.edges().iter().enumerate() {
        cost[2 * n + k] = e.w;
    }
    let mut cut = LinearProgram::minimize(cost);
    for (k, e) in g.edges().iter().enumerate() {
        let diff = [(e.i, 1.0), (n + e.i, -1.0), (e.j, -1.0), (n + e.j, 1.0)];
        let plus: Vec<_> = diff.iter().map(|&(v, a)| (v, -a)).chain([(2 * n + k, 1.0)]).collect();
        let minus: Vec<_> = diff.iter().cloned().chain([(2 * n + k, 1.0)]).collect();
        cut.constrain_sparse(&plus, Sense::Ge, 0.0)?;
        cut.constrain_sparse(&minus, Sense::Ge, 0.0)?;
    }
    let terms: Vec<_> = (0..n).flat_map(|i| [(i, r[i]), (n + i, -r[i])]).collect();
    cut.constrain_sparse(&terms, Sense::Eq, 1.0)?;
    let cut_sol = cut.solve()?;
    let potentials = (0..n).map(|i| cut_sol.x[i] - cut_sol.x[n + i]).collect();

    // Variables [J⁺ (m) | J⁻ (m) | t].
    let mut cost = vec![0.0; 2 * m + 1];
    cost[2 * m] = 1.0;
    let mut flow = LinearProgram::maximize(cost);
    let mut rows = vec![Vec::new(); n];
    for (k, e) in g.edges().iter().enumerate() {
        rows[e.i].extend([(k, 1.0), (m + k, -1.0)]);
        rows[e.j].extend([(k, -1.0), (m + k, 1.0)]);
        flow.constrain_sparse(&[(k, 1.0), (m + k, 1.0)], Sense::Le, e.w)?;
    }
    for (i, mut terms) in rows.into_iter().enumerate() {
        terms.push((2 * m, -r[i]));
        flow.constrain_sparse(&terms, Sense::Eq, 0.0)?;
    }
    let flow_sol = flow.solve()?;
    Ok(MincutReport {
        mincut: cut_sol.objective,
        maxflow: flow_sol.objective,
        potentials,
        flow: (0..m).map(|k| flow_sol.x[k] - flow_sol.x[m + k]).collect(),
    })
}

/// Classical `s`–`t` mincut by enumerating all `2^{n−2}` partitions.
pub fn exhaustive_st_mincut(g: &WeightedGraph, s: usize, t: usize) -> Result<f64> {
    let n = g.node_count();
    if n > 24 {
        return Err(Error::TooLarge(format!("exhaustive mincut handles n ≤ 24, got {n}")));
    }
    if s >= n || t >= n || s == t {
        return Err(Error::param(format!("need distinct terminals in 0..{n}, got {s} and {t}")));
    }
    let others: Vec<usize> = (0..n).filter(|&v| v != s && v != t).collect();
    let mut best = f64::INFINITY;
    let mut side = vec![false; n];
    for mask in 0u64..(1u64 << others.len()) {
        side[s] = true;
        side[t] = false;
        for (b, &v) in others.iter().enumerate() {
            side[v] = (mask >> b) & 1 == 1;
        }
        let cut: f64 = g.edges().iter().filter(|e| side[e.i] != side[e.j]).map(|e| e.w).sum();
        best = best.min(cut);
    }
    Ok(best)
}

/// Closed-form threshold-cut expectations for `T ~ U[0, ‖φ‖_∞]`,
/// `A_T = {φ ≥ T}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizedCut {
    /// `E[w(A_T, B_T)] = Σ w|Δφ| / ‖φ‖_∞`.
    pub expected_cut: f64,
    /// `E[(μ − ν)(A_T)] = 1 / ‖φ‖_∞`.
    pub expected_separation: f64,
    /// Their ratio, which equals the `C₁` objective at `φ`.
    pub ratio: f64,
}

fn check_cut_potential(g: &WeightedGraph, r: &[f64], phi: &[f64]) -> Result<f64> {
    Error::check_len(g.node_count(), phi.len())?;
    Error::check_len(g.node_count(), r.len())?;
    if let Some(i) = phi.iter().position(|v| !(*v >= 0.0)) {
        return Err(Error::param(format!("potential entry {i} is negative")));
    }
    let dot: f64 = phi.iter().zip(r).map(|(a, b)| a * b).sum();
    if (dot - 1.0).abs() > 1e-8 {
        return Err(Error::param(format!("potential must satisfy φᵀ(μ − ν) = 1, got {dot}")));
    }
    Ok(phi.iter().cloned().fold(0.0, f64::max))
}

pub fn randomized_cut_check(g: &WeightedGraph, mu: &NodeMeasure, nu: &NodeMeasure, phi: &[f64]) -> Result<RandomizedCut> {
    let r = mu.minus(nu);
    let top = check_cut_potential(g, &r, phi)?;
    let variation: f64 = g.edges().iter().map(|e| e.w * (phi[e.i] - phi[e.j]).abs()).sum();
    let expected_cut = variation / top;
    let expected_separation = 1.0 / top;
    Ok(RandomizedCut { expected_cut, expected_separation, ratio: expected_cut / expected_separation })
}

/// Sample means and standard errors of the cut weight and the separated
/// mass over `samples` thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloCut {
    pub cut_mean: f64,
    pub cut_se: f64,
    pub separation_mean: f64,
    pub separation_se: f64,
}

impl MonteCarloCut {
    /// Both means within `k` standard errors of the closed form (plus
    /// roundoff, for potentials whose threshold cuts never vary).
    pub fn agrees_with(&self, exact: &RandomizedCut, k: f64) -> bool {
        let close = |mean: f64, se: f64, target: f64| (mean - target).abs() <= k * se + 1e-10 * target.abs().max(1.0);
        close(self.cut_mean, self.cut_se, exact.expected_cut) && close(self.separation_mean, self.separation_se, exact.expected_separation)
    }
}

pub fn monte_carlo_cuts(g: &WeightedGraph, mu: &NodeMeasure, nu: &NodeMeasure, phi: &[f64], samples: usize, seed: u64) -> Result<MonteCarloCut> {
    let r = mu.minus(nu);
    let top = check_cut_potential(g, &r, phi)?;
    if samples < 2 {
        return Err(Error::param("need at least two samples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut cs, mut cs2, mut ss, mut ss2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        let t = rng.random_range(0.0..top);
        let cut: f64 = g.edges().iter().filter(|e| (phi[e.i] >= t) != (phi[e.j] >= t)).map(|e| e.w).sum();
        let sep: f64 = phi.iter().zip(&r).filter(|(p, _)| **p >= t).map(|(_, r)| r).sum();
        cs += cut;
        cs2 += cut * cut;
        ss += sep;
        ss2 += sep * sep;
    }
    let k = samples as f64;
    let se = |s: f64, s2: f64| ((s2 / k - (s / k).powi(2)).max(0.0) * k / (k - 1.0) / k).sqrt();
    Ok(MonteCarloCut { cut_mean: cs / k, cut_se: se(cs, cs2), separation_mean: ss / k, separation_se: se(ss, ss2) })
}
