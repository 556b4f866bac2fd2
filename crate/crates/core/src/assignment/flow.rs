//! Min-cost flow by successive shortest paths (Dijkstra with potentials).
//! Arc costs must be nonnegative.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i64,
    cost: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        Self { arcs: Vec::new(), out: vec![Vec::new(); nodes] }
    }

    /// Adds `from → to` and its residual twin; returns the arc id.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        debug_assert!(cost >= 0.0);
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.arcs.push(Arc { to: from, cap: 0, cost: -cost });
        self.out[from].push(id);
        self.out[to].push(id + 1);
        id
    }

    pub fn flow(&self, arc: usize) -> i64 {
        self.arcs[arc + 1].cap
    }

    /// Pushes up to `amount` units from `s` to `t` at minimum cost; returns
    /// the amount sent.
    pub fn min_cost_flow(&mut self, s: usize, t: usize, amount: i64) -> i64 {
        let n = self.out.len();
        let mut potential = vec![0.0; n];
        let mut sent = 0;
        while sent < amount {
            let mut dist = vec![f64::INFINITY; n];
            let mut prev = vec![usize::MAX; n];
            dist[s] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(Entry(0.0, s));
            while let Some(Entry(d, v)) = heap.pop() {
                if d > dist[v] {
                    continue;
                }
                for &id in &self.out[v] {
                    let arc = &self.arcs[id];
                    if arc.cap <= 0 {
                        continue;
                    }
                    // Reduced costs are nonnegative up to roundoff.
                    let nd = d + (arc.cost + potential[v] - potential[arc.to]).max(0.0);
                    if nd < dist[arc.to] {
                        dist[arc.to] = nd;
                        prev[arc.to] = id;
                        heap.push(Entry(nd, arc.to));
                    }
                }
            }
            if !dist[t].is_finite() {
                break;
            }
            for v in 0..n {
                if dist[v].is_finite() {
                    potential[v] += dist[v];
                }
            }
            let mut push = amount - sent;
            let mut v = t;
            while v != s {
                let id = prev[v];
                push = push.min(self.arcs[id].cap);
                v = self.arcs[id ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let id = prev[v];
                self.arcs[id].cap -= push;
                self.arcs[id ^ 1].cap += push;
                v = self.arcs[id ^ 1].to;
            }
            sent += push;
        }
        sent
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_cheapest_routes() {
        // Two units from 0 to 3: paths 0-1-3 (cost 2) and 0-2-3 (cost 5).
        let mut net = FlowNetwork::new(4);
        let a = net.add_arc(0, 1, 1, 1.0);
        let b = net.add_arc(0, 2, 1, 2.0);
        net.add_arc(1, 3, 1, 1.0);
        net.add_arc(2, 3, 1, 3.0);
        assert_eq!(net.min_cost_flow(0, 3, 1), 1);
        assert_eq!((net.flow(a), net.flow(b)), (1, 0));
        assert_eq!(net.min_cost_flow(0, 3, 5), 1);
        assert_eq!(net.flow(b), 1);
    }

    #[test]
    fn reroutes_through_residual_arcs() {
        // The greedy first path 0-1-2-3 must be undone to send two units.
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, 1, 0.0);
        net.add_arc(0, 2, 1, 2.0);
        let mid = net.add_arc(1, 2, 1, 0.0);
        net.add_arc(1, 3, 1, 2.0);
        net.add_arc(2, 3, 1, 0.0);
        assert_eq!(net.min_cost_flow(0, 3, 2), 2);
        assert_eq!(net.flow(mid), 0);
    }
}
