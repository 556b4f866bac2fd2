//! Random instances for the fuzz suites.

use crate::graph::WeightedGraph;
use crate::measures::NodeMeasure;
use rand::{Rng, RngExt};
use std::collections::HashSet;

/// Random connected graph: a random spanning tree plus each other pair with
/// probability `density`, weights uniform in [0.5, 2].
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, density: f64) -> WeightedGraph {
    random_graph_with(rng, n, density, |rng| rng.random_range(0.5..2.0))
}

/// Same shape as [`random_connected_graph`] with weights drawn by `weight`.
pub fn random_graph_with<R: Rng>(rng: &mut R, n: usize, density: f64, mut weight: impl FnMut(&mut R) -> f64) -> WeightedGraph {
    let mut edges = Vec::new();
    let mut present = HashSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        let w = weight(rng);
        edges.push((u, v, w));
        present.insert((u, v));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !present.contains(&(i, j)) && rng.random_bool(density) {
                let w = weight(rng);
                edges.push((i, j, w));
            }
        }
    }
    WeightedGraph::new(n, edges).expect("generated edges are valid")
}

/// Probability measure with random positive mass on `support` random nodes.
pub fn random_probability<R: Rng>(rng: &mut R, n: usize, support: usize) -> NodeMeasure {
    let nodes = rand::seq::index::sample(rng, n, support.clamp(1, n)).into_vec();
    let mut values = vec![0.0; n];
    for v in nodes {
        values[v] = rng.random_range(0.1..1.0);
    }
    let total: f64 = values.iter().sum();
    values.iter_mut().for_each(|v| *v /= total);
    NodeMeasure::new(values).expect("normalized nonnegative vector")
}

/// Two distinct random probability measures.
pub fn random_measure_pair<R: Rng>(rng: &mut R, n: usize) -> (NodeMeasure, NodeMeasure) {
    loop {
        let (a, b) = (rng.random_range(1..=n.div_ceil(2)), rng.random_range(1..=n.div_ceil(2)));
        let mu = random_probability(rng, n, a);
        let nu = random_probability(rng, n, b);
        if mu.minus(&nu).iter().any(|v| v.abs() > 1e-6) {
            return (mu, nu);
        }
    }
}
