//! Turning potentials into labels: argmax, cardinality-constrained
//! transportation, and MBO refinement.

mod flow;
mod mbo;
pub mod simplex;

pub use mbo::{mbo_refine, MboConfig};

use crate::error::{Error, Result};
use flow::FlowNetwork;
use nalgebra::DMatrix;
use simplex::{LinearProgram, Sense};
use std::io::Write;

/// Index of the largest value; the lowest index wins ties.
pub(crate) fn argmax_row(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// `label_i = argmax_j Φ_ij`, lowest class index on ties.
pub fn argmax_assign(phi: &DMatrix<f64>) -> Vec<usize> {
    (0..phi.nrows()).map(|i| argmax_row(phi.row(i).iter().cloned())).collect()
}

/// A point of `{P ≥ 0 : P1 = 1, m − ε ≤ Pᵀ1 ≤ m + ε}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMatrix {
    p: DMatrix<f64>,
    cardinalities: Vec<usize>,
    epsilon: f64,
}

impl AssignmentMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Row argmax of `P` (the assignment itself when `P` is binary).
    pub fn labels(&self) -> Vec<usize> {
        argmax_assign(&self.p)
    }

    pub fn is_binary(&self) -> bool {
        self.p.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// `⟨Φ, P⟩`.
    pub fn score(&self, phi: &DMatrix<f64>) -> f64 {
        self.p.component_mul(phi).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransportRoute {
    /// Min-cost flow when the cardinality bounds are integral, simplex
    /// otherwise.
    #[default]
    Auto,
    Simplex,
    Flow,
}

fn check_transport(phi: &DMatrix<f64>, m: &[usize], epsilon: f64) -> Result<()> {
    Error::check_len(phi.ncols(), m.len())?;
    if m.iter().sum::<usize>() != phi.nrows() {
        return Err(Error::param(format!("cardinalities sum to {}, expected n = {}", m.iter().sum::<usize>(), phi.nrows())));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::param(format!("cardinality slack must be nonnegative, got {epsilon}")));
    }
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("potentials must be finite"));
    }
    Ok(())
}

/// `argmax ⟨Φ, P⟩` over the transportation polytope with per-class slack `ε`.
pub fn transport_assign(phi: &DMatrix<f64>, m: &[usize], epsilon: f64) -> Result<AssignmentMatrix> {
    transport_assign_with(phi, m, epsilon, TransportRoute::Auto)
}

pub fn transport_assign_with(phi: &DMatrix<f64>, m: &[usize], epsilon: f64, route: TransportRoute) -> Result<AssignmentMatrix> {
    check_transport(phi, m, epsilon)?;
    let route = match route {
        TransportRoute::Auto if epsilon.fract() == 0.0 || epsilon >= phi.nrows() as f64 => TransportRoute::Flow,
        TransportRoute::Auto => TransportRoute::Simplex,
        r => r,
    };
    match route {
        TransportRoute::Simplex => transport_simplex(phi, m, epsilon),
        _ => transport_flow(phi, m, epsilon),
    }
}

fn transport_simplex(phi: &DMatrix<f64>, m: &[usize], epsilon: f64) -> Result<AssignmentMatrix> {
    let (n, k) = phi.shape();
    let var = |i: usize, c: usize| i * k + c;
    let mut lp = LinearProgram::maximize((0..n * k).map(|v| phi[(v / k, v % k)]).collect());
    for i in 0..n {
        let terms: Vec<(usize, f64)> = (0..k).map(|c| (var(i, c), 1.0)).collect();
        lp.constrain_sparse(&terms, Sense::Eq, 1.0)?;
    }
    for c in 0..k {
        let terms: Vec<(usize, f64)> = (0..n).map(|i| (var(i, c), 1.0)).collect();
        if epsilon == 0.0 {
            lp.constrain_sparse(&terms, Sense::Eq, m[c] as f64)?;
        } else {
            lp.constrain_sparse(&terms, Sense::Le, m[c] as f64 + epsilon)?;
            if m[c] as f64 > epsilon {
                lp.constrain_sparse(&terms, Sense::Ge, m[c] as f64 - epsilon)?;
            }
        }
    }
    let sol = lp.solve()?;
    let mut p = DMatrix::from_fn(n, k, |i, c| sol.x[var(i, c)]);
    // Vertices of an integral polytope: snap roundoff.
    for v in p.iter_mut() {
        if (*v - v.round()).abs() <= 1e-9 {
            *v = v.round();
        }
    }
    Ok(AssignmentMatrix { p, cardinalities: m.to_vec(), epsilon })
}

fn transport_flow(phi: &DMatrix<f64>, m: &[usize], epsilon: f64) -> Result<AssignmentMatrix> {
    let (n, k) = phi.shape();
    let top = phi.max();
    let range = (top - phi.min()).max(1.0);
    // Every unit crosses exactly one class → sink arc; flow above the lower
    // bound pays `penalty`, which exceeds any achievable gain in ⟨Φ, P⟩.
    let penalty = 1.0 + 2.0 * n as f64 * range;
    let (source, sink) = (n + k, n + k + 1);
    let mut net = FlowNetwork::new(n + k + 2);
    for i in 0..n {
        net.add_arc(source, i, 1, 0.0);
    }
    let mut assign_arcs = Vec::with_capacity(n * k);
    for i in 0..n {
        for c in 0..k {
            assign_arcs.push(net.add_arc(i, n + c, 1, top - phi[(i, c)]));
        }
    }
    let mut lower_arcs = Vec::with_capacity(k);
    let mut lower_total = 0;
    for (c, &mc) in m.iter().enumerate() {
        let lower = (mc as f64 - epsilon).max(0.0).ceil() as i64;
        let upper = ((mc as f64 + epsilon).floor() as i64).min(n as i64);
        if lower > upper {
            return Err(Error::Infeasible);
        }
        lower_arcs.push((net.add_arc(n + c, sink, lower, 0.0), lower));
        lower_total += lower;
        if upper > lower {
            net.add_arc(n + c, sink, upper - lower, penalty);
        }
    }
    let sent = net.min_cost_flow(source, sink, n as i64);
    if sent < n as i64 || lower_total > n as i64 || lower_arcs.iter().any(|&(a, l)| net.flow(a) < l) {
        return Err(Error::Infeasible);
    }
    let p = DMatrix::from_fn(n, k, |i, c| net.flow(assign_arcs[i * k + c]) as f64);
    Ok(AssignmentMatrix { p, cardinalities: m.to_vec(), epsilon })
}

/// `node_id,predicted_class` lines for the given node ids.
pub fn write_predictions_csv(mut out: impl Write, nodes: &[usize], labels: &[usize]) -> std::io::Result<()> {
    writeln!(out, "node_id,predicted_class")?;
    for (node, label) in nodes.iter().zip(labels) {
        writeln!(out, "{node},{label}")?;
    }
    Ok(())
}
