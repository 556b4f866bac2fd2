use super::WeightedGraph;
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Exact neighbor search is quadratic; refuse inputs beyond this size.
pub const MAX_EXACT_KNN_NODES: usize = 20_000;

/// Symmetric k-NN graph with Gaussian weights `exp(−4‖x_i − x_j‖² / d_k(x_i)²)`,
/// where `d_k(x_i)` is the distance from `x_i` to its k-th nearest neighbor.
///
/// Neighbor ties are broken by index. An edge selected from both endpoints
/// keeps the larger of the two weights.
pub fn build_knn_graph(features: &[Vec<f64>], k: usize) -> Result<WeightedGraph> {
    let n = features.len();
    if n < 2 {
        return Err(Error::param(format!("k-NN graph needs at least 2 points, got {n}")));
    }
    if k == 0 || k >= n {
        return Err(Error::param(format!("k must satisfy 1 <= k < n (k = {k}, n = {n})")));
    }
    if n > MAX_EXACT_KNN_NODES {
        return Err(Error::TooLarge(format!(
            "{n} points exceeds the exact k-NN limit of {MAX_EXACT_KNN_NODES}"
        )));
    }
    let dim = features[0].len();
    for (idx, row) in features.iter().enumerate() {
        Error::check_len(dim, row.len())?;
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::param(format!("feature row {idx} is not finite")));
        }
    }

    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut dists: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for (i, xi) in features.iter().enumerate() {
        dists.clear();
        dists.extend(
            features
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, xj)| (squared_distance(xi, xj), j)),
        );
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        dists.select_nth_unstable_by(k - 1, by_dist);
        let nearest = &mut dists[..k];
        nearest.sort_unstable_by(by_dist);
        let dk2 = nearest[k - 1].0;
        if dk2 == 0.0 {
            return Err(Error::DuplicatePoint { point: i });
        }
        for &(d2, j) in nearest.iter() {
            let w = (-4.0 * d2 / dk2).exp();
            let key = (i.min(j), i.max(j));
            let slot = weights.entry(key).or_insert(w);
            *slot = slot.max(w);
        }
    }

    WeightedGraph::new(n, weights.into_iter().map(|((i, j), w)| (i, j, w)))
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_points() {
        let g = build_knn_graph(&[vec![0.0, 0.0], vec![3.0, 4.0]], 1).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!((g.edges()[0].w - (-4.0f64).exp()).abs() < 1e-15);
        assert!((g.edges()[0].w - 0.0183156).abs() < 1e-7);
    }

    #[test]
    fn collinear_points_make_a_path() {
        let g = build_knn_graph(&[vec![0.0], vec![1.0], vec![2.0]], 1).unwrap();
        let pairs: Vec<_> = g.edges().iter().map(|e| (e.i, e.j)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
        for e in g.edges() {
            assert_eq!(e.w, (-4.0f64).exp());
        }
    }

    #[test]
    fn separated_clusters_give_two_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut pts = Vec::new();
        for c in [0.0, 100.0] {
            for _ in 0..25 {
                pts.push(vec![c + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            }
        }
        let g = build_knn_graph(&pts, 5).unwrap();
        let comps = g.connected_components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], (0..25).collect::<Vec<_>>());
    }

    #[test]
    fn weights_in_unit_interval_and_kth_neighbor_hits_exp_minus_four() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let k = 4;
        let g = build_knn_graph(&pts, k).unwrap();
        for e in g.edges() {
            assert!(e.w > 0.0 && e.w <= 1.0);
        }
        // The k-th neighbor of each point sits at exactly exp(-4) unless the
        // other endpoint chose the same edge with a larger weight.
        for i in 0..pts.len() {
            let mut d: Vec<(f64, usize)> = (0..pts.len())
                .filter(|&j| j != i)
                .map(|j| (squared_distance(&pts[i], &pts[j]), j))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let j = d[k - 1].1;
            let w = g
                .edges()
                .iter()
                .find(|e| e.i == i.min(j) && e.j == i.max(j))
                .unwrap()
                .w;
            assert!(w >= (-4.0f64).exp() - 1e-15);
        }
    }

    #[test]
    fn duplicate_points_are_rejected() {
        let pts = vec![vec![0.0], vec![0.0], vec![1.0]];
        assert!(matches!(build_knn_graph(&pts, 1), Err(Error::DuplicatePoint { point: 0 })));
    }

    #[test]
    fn parameter_errors() {
        let pts = vec![vec![0.0], vec![1.0]];
        assert!(build_knn_graph(&pts, 2).is_err());
        assert!(build_knn_graph(&pts, 0).is_err());
        assert!(build_knn_graph(&pts[..1], 1).is_err());
        assert!(build_knn_graph(&[vec![0.0], vec![f64::NAN]], 1).is_err());
    }
}
