//! Weighted undirected graphs and the operators the solvers are built on.
//!
//! Edges are stored once, as `(i, j, w)` with `i < j`, sorted lexicographically.
//! The oriented incidence operator `B` puts `+1` at `i` and `-1` at `j`, so
//! `(Bᵀφ)_e = φ_i − φ_j`. A per-node adjacency index keeps every matvec at
//! `O(|E|)`.

mod io;
mod knn;

pub use io::{declared_node_count, read_features_csv, read_graph, write_graph};
pub use knn::{build_knn_graph, MAX_EXACT_KNN_NODES};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    degrees: Vec<f64>,
    // CSR adjacency: for node v, adj[offsets[v]..offsets[v + 1]] holds (neighbor, edge index).
    offsets: Vec<usize>,
    adj: Vec<(usize, usize)>,
}

impl WeightedGraph {
    /// Builds a graph from an edge list. Endpoints may be given in either
    /// order; self-loops, duplicates and non-positive weights are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut list = Vec::new();
        for (a, b, w) in edges {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if i == j {
                return Err(Error::InvalidEdge { i: a, j: b, w, reason: "self-loop" });
            }
            if j >= n {
                return Err(Error::InvalidEdge { i: a, j: b, w, reason: "endpoint out of range" });
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidEdge { i: a, j: b, w, reason: "weight must be finite and positive" });
            }
            list.push(Edge { i, j, w });
        }
        list.sort_by_key(|e| (e.i, e.j));
        if let Some(pair) = list.windows(2).find(|p| p[0].i == p[1].i && p[0].j == p[1].j) {
            let e = pair[1];
            return Err(Error::InvalidEdge { i: e.i, j: e.j, w: e.w, reason: "duplicate edge" });
        }

        let mut degrees = vec![0.0; n];
        let mut counts = vec![0usize; n + 1];
        for e in &list {
            degrees[e.i] += e.w;
            degrees[e.j] += e.w;
            counts[e.i + 1] += 1;
            counts[e.j + 1] += 1;
        }
        for v in 0..n {
            counts[v + 1] += counts[v];
        }
        let offsets = counts;
        let mut cursor = offsets.clone();
        let mut adj = vec![(0, 0); 2 * list.len()];
        for (idx, e) in list.iter().enumerate() {
            adj[cursor[e.i]] = (e.j, idx);
            cursor[e.i] += 1;
            adj[cursor[e.j]] = (e.i, idx);
            cursor[e.j] += 1;
        }

        Ok(Self { n, edges: list, degrees, offsets, adj })
    }

    /// Unit-weight `rows × cols` grid; node `(r, c)` has index `r * cols + c`.
    pub fn lattice(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::with_capacity(2 * rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1, 1.0));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols, 1.0));
                }
            }
        }
        Self::new(rows * cols, edges).expect("lattice edges are valid")
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.w).collect()
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Neighbors of `v` as `(neighbor, edge index)` pairs.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[self.offsets[v]..self.offsets[v + 1]]
    }

    /// `(D − W)x` in one pass over the edges.
    pub fn laplacian_apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.n, x.len())?;
        let mut out = vec![0.0; self.n];
        self.laplacian_apply_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn laplacian_apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for e in &self.edges {
            let flow = e.w * (x[e.i] - x[e.j]);
            out[e.i] += flow;
            out[e.j] -= flow;
        }
    }

    /// `Bᵀφ`: one entry `φ_i − φ_j` per edge.
    pub fn incidence_apply_t(&self, phi: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.n, phi.len())?;
        let mut out = vec![0.0; self.edges.len()];
        self.incidence_t_into(phi, &mut out);
        Ok(out)
    }

    pub(crate) fn incidence_t_into(&self, phi: &[f64], out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.edges) {
            *o = phi[e.i] - phi[e.j];
        }
    }

    /// `BJ`: net outflow at each node of the edge flow `J`.
    pub fn incidence_apply(&self, flow: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.edges.len(), flow.len())?;
        let mut out = vec![0.0; self.n];
        self.incidence_into(flow, &mut out);
        Ok(out)
    }

    pub(crate) fn incidence_into(&self, flow: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (f, e) in flow.iter().zip(&self.edges) {
            out[e.i] += f;
            out[e.j] -= f;
        }
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.i), find(&mut parent, e.j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut slot = vec![usize::MAX; self.n];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for v in 0..self.n {
            let root = find(&mut parent, v);
            if slot[root] == usize::MAX {
                slot[root] = comps.len();
                comps.push(Vec::new());
            }
            comps[slot[root]].push(v);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && self.connected_components().len() == 1
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        let components = self.connected_components().len();
        if components == 1 {
            Ok(())
        } else {
            Err(Error::Disconnected { components })
        }
    }

    /// Induced subgraph on `nodes` (which must be sorted and unique). Node
    /// `nodes[k]` becomes node `k`.
    pub fn subgraph(&self, nodes: &[usize]) -> Self {
        let mut index = vec![usize::MAX; self.n];
        for (k, &v) in nodes.iter().enumerate() {
            index[v] = k;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| index[e.i] != usize::MAX && index[e.j] != usize::MAX)
            .map(|e| (index[e.i], index[e.j], e.w));
        Self::new(nodes.len(), edges).expect("subgraph of a valid graph is valid")
    }

    /// Nodes of the largest connected component (ties go to the component
    /// containing the smallest node index).
    pub fn largest_component(&self) -> Vec<usize> {
        self.connected_components()
            .into_iter()
            .fold(Vec::new(), |best, c| if c.len() > best.len() { c } else { best })
    }

    /// `‖L‖₁ = 2 · max degree`.
    pub fn laplacian_norm1(&self) -> f64 {
        2.0 * self.degrees.iter().cloned().fold(0.0, f64::max)
    }
}
