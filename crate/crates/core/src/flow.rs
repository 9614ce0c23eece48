//! Dinic maximum flow with floating-point capacities.
//!
//! Residual capacities at or below a small relative epsilon count as saturated. The search
//! is iterative so large grids do not overflow the stack.

use std::collections::VecDeque;

const UNREACHED: usize = usize::MAX;

/// Directed network with a source and a sink. Arcs `2k` and `2k + 1` are mutual reverses.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    source: usize,
    sink: usize,
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    max_cap: f64,
    flow: f64,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Self {
        assert!(source < nodes && sink < nodes && source != sink, "bad terminals");
        FlowNetwork {
            source,
            sink,
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            max_cap: 0.0,
            flow: 0.0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// Arc `u -> v` with capacity `c`.
    pub fn add_arc(&mut self, u: usize, v: usize, c: f64) {
        self.add_edge(u, v, c, 0.0);
    }

    /// Pair of opposite arcs sharing residual bookkeeping.
    pub fn add_edge(&mut self, u: usize, v: usize, c_uv: f64, c_vu: f64) {
        assert!(c_uv >= 0.0 && c_vu >= 0.0, "capacities must be nonnegative");
        let k = self.to.len();
        self.to.push(v);
        self.cap.push(c_uv);
        self.adj[u].push(k);
        self.to.push(u);
        self.cap.push(c_vu);
        self.adj[v].push(k + 1);
        self.max_cap = self.max_cap.max(c_uv).max(c_vu);
    }

    fn eps(&self) -> f64 {
        1e-14 * self.max_cap.max(1.0)
    }

    fn bfs(&self, level: &mut [usize]) -> bool {
        let eps = self.eps();
        level.fill(UNREACHED);
        level[self.source] = 0;
        let mut queue = VecDeque::from([self.source]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let v = self.to[a];
                if self.cap[a] > eps && level[v] == UNREACHED {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level[self.sink] != UNREACHED
    }

    /// Runs to completion and returns the total flow pushed so far.
    pub fn max_flow(&mut self) -> f64 {
        let n = self.node_count();
        let eps = self.eps();
        let mut level = vec![UNREACHED; n];
        let mut it = vec![0usize; n];
        let mut path: Vec<usize> = Vec::new();
        while self.bfs(&mut level) {
            it.fill(0);
            path.clear();
            let mut u = self.source;
            loop {
                if u == self.sink {
                    let bottleneck = path.iter().map(|&a| self.cap[a]).fold(f64::INFINITY, f64::min);
                    for &a in &path {
                        self.cap[a] -= bottleneck;
                        self.cap[a ^ 1] += bottleneck;
                    }
                    self.flow += bottleneck;
                    let k = path.iter().position(|&a| self.cap[a] <= eps).unwrap_or(0);
                    u = self.to[path[k] ^ 1];
                    path.truncate(k);
                    continue;
                }
                let mut advanced = false;
                while it[u] < self.adj[u].len() {
                    let a = self.adj[u][it[u]];
                    let v = self.to[a];
                    if self.cap[a] > eps && level[v] == level[u] + 1 {
                        path.push(a);
                        u = v;
                        advanced = true;
                        break;
                    }
                    it[u] += 1;
                }
                if !advanced {
                    if u == self.source {
                        break;
                    }
                    level[u] = UNREACHED;
                    let a = path.pop().expect("non-source node has an incoming path arc");
                    u = self.to[a ^ 1];
                    it[u] += 1;
                }
            }
        }
        self.flow
    }

    /// Nodes reachable from the source in the residual graph: the smallest minimum cut.
    pub fn source_side(&self) -> Vec<bool> {
        let eps = self.eps();
        let mut seen = vec![false; self.node_count()];
        seen[self.source] = true;
        let mut stack = vec![self.source];
        while let Some(u) = stack.pop() {
            for &a in &self.adj[u] {
                let v = self.to[a];
                if self.cap[a] > eps && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Nodes that cannot reach the sink in the residual graph: the largest minimum cut.
    pub fn maximal_source_side(&self) -> Vec<bool> {
        let eps = self.eps();
        let mut reaches = vec![false; self.node_count()];
        reaches[self.sink] = true;
        let mut stack = vec![self.sink];
        while let Some(v) = stack.pop() {
            // Arc u -> v has residual cap[a ^ 1] where a is the arc stored at v pointing to u.
            for &a in &self.adj[v] {
                let u = self.to[a];
                if self.cap[a ^ 1] > eps && !reaches[u] {
                    reaches[u] = true;
                    stack.push(u);
                }
            }
        }
        reaches.iter().map(|r| !r).collect()
    }
}

/// Maximum flow value and the source side of the smallest minimum cut.
pub fn max_flow(net: &mut FlowNetwork) -> (f64, Vec<bool>) {
    let v = net.max_flow();
    (v, net.source_side())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_arc() {
        let mut net = FlowNetwork::new(2, 0, 1);
        net.add_arc(0, 1, 3.0);
        let (v, side) = max_flow(&mut net);
        assert_eq!(v, 3.0);
        assert_eq!(side, vec![true, false]);
    }

    #[test]
    fn classic_network() {
        // CLRS example, max flow 23.
        let mut net = FlowNetwork::new(6, 0, 5);
        for &(u, v, c) in &[
            (0, 1, 16.0),
            (0, 2, 13.0),
            (1, 3, 12.0),
            (2, 1, 4.0),
            (2, 4, 14.0),
            (3, 2, 9.0),
            (3, 5, 20.0),
            (4, 3, 7.0),
            (4, 5, 4.0),
        ] {
            net.add_arc(u, v, c);
        }
        assert_eq!(net.max_flow(), 23.0);
        let side = net.source_side();
        let cut: f64 = [(1usize, 3usize, 12.0), (4, 3, 7.0), (4, 5, 4.0)]
            .iter()
            .filter(|(u, v, _)| side[*u] && !side[*v])
            .map(|e| e.2)
            .sum();
        assert_eq!(cut, 23.0);
    }

    #[test]
    fn minimal_and_maximal_cuts_differ_on_ties() {
        // s -1-> a -1-> t: both {s} and {s, a} are minimum cuts.
        let mut net = FlowNetwork::new(3, 0, 2);
        net.add_arc(0, 1, 1.0);
        net.add_arc(1, 2, 1.0);
        net.max_flow();
        assert_eq!(net.source_side(), vec![true, false, false]);
        assert_eq!(net.maximal_source_side(), vec![true, true, false]);
    }

    #[test]
    fn long_path_does_not_overflow() {
        let n = 200_000;
        let mut net = FlowNetwork::new(n, 0, n - 1);
        for i in 0..n - 1 {
            net.add_arc(i, i + 1, 1.0 + (i % 7) as f64);
        }
        assert_eq!(net.max_flow(), 1.0);
    }
}
