//! Exact s-t minimum cut via Dinic's blocking-flow algorithm.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

/// Residual capacities below this are treated as saturated.
const EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    cap: f64,
}

/// Directed capacitated network. Arcs are stored in pairs (`i`, `i ^ 1`).
#[derive(Clone, Debug, Default)]
pub struct FlowNetwork {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinCut {
    pub value: f64,
    /// `true` for nodes on the source side of the cut.
    pub source_side: Vec<bool>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { arcs: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    /// Add arc `u -> v`. Negative or NaN capacities are clamped to zero;
    /// `f64::INFINITY` is allowed.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: f64) {
        let cap = if cap > 0.0 { cap } else { 0.0 };
        self.adj[u].push(self.arcs.len());
        self.arcs.push(Arc { to: v, cap });
        self.adj[v].push(self.arcs.len());
        self.arcs.push(Arc { to: u, cap: 0.0 });
    }

    /// Add `u -> v` with `cap_uv` and `v -> u` with `cap_vu`.
    pub fn add_edge(&mut self, u: usize, v: usize, cap_uv: f64, cap_vu: f64) {
        self.add_arc(u, v, cap_uv);
        self.add_arc(v, u, cap_vu);
    }

    /// Max flow from `s` to `t`, consuming the residual capacities.
    pub fn min_cut(mut self, s: usize, t: usize) -> MinCut {
        let n = self.adj.len();
        let mut value = 0.0;
        let mut level = vec![usize::MAX; n];
        let mut iter = vec![0usize; n];
        if s != t {
            while self.bfs(s, t, &mut level) {
                iter.iter_mut().for_each(|i| *i = 0);
                loop {
                    let pushed = self.augment(s, t, &level, &mut iter);
                    if pushed <= 0.0 {
                        break;
                    }
                    value += pushed;
                    if pushed.is_infinite() {
                        break;
                    }
                }
                if value.is_infinite() {
                    break;
                }
            }
        }
        // Source side = reachable in the residual graph.
        let mut source_side = vec![false; n];
        let mut queue = VecDeque::from([s]);
        source_side[s] = true;
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let arc = &self.arcs[a];
                if arc.cap > EPS && !source_side[arc.to] {
                    source_side[arc.to] = true;
                    queue.push_back(arc.to);
                }
            }
        }
        MinCut { value, source_side }
    }

    fn bfs(&self, s: usize, t: usize, level: &mut [usize]) -> bool {
        level.iter_mut().for_each(|l| *l = usize::MAX);
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let arc = &self.arcs[a];
                if arc.cap > EPS && level[arc.to] == usize::MAX {
                    level[arc.to] = level[u] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        level[t] != usize::MAX
    }

    /// Find one augmenting path in the level graph (iterative DFS) and push
    /// its bottleneck. Returns 0 when the level graph is blocked.
    fn augment(&mut self, s: usize, t: usize, level: &[usize], iter: &mut [usize]) -> f64 {
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let bottleneck = path.iter().map(|&a| self.arcs[a].cap).fold(f64::INFINITY, f64::min);
                for &a in &path {
                    self.arcs[a].cap -= bottleneck;
                    if self.arcs[a ^ 1].cap.is_finite() {
                        self.arcs[a ^ 1].cap += bottleneck;
                    }
                }
                return bottleneck;
            }
            let mut advanced = false;
            while iter[u] < self.adj[u].len() {
                let a = self.adj[u][iter[u]];
                let arc = &self.arcs[a];
                if arc.cap > EPS && level[arc.to] == level[u] + 1 {
                    path.push(a);
                    u = arc.to;
                    advanced = true;
                    break;
                }
                iter[u] += 1;
            }
            if !advanced {
                // Dead end: retreat and skip the arc that led here.
                match path.pop() {
                    Some(a) => {
                        u = self.arcs[a ^ 1].to;
                        iter[u] += 1;
                    }
                    None => return 0.0,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_arc() {
        let mut g = FlowNetwork::new(2);
        g.add_arc(0, 1, 3.0);
        let cut = g.min_cut(0, 1);
        assert_eq!(cut.value, 3.0);
        assert_eq!(cut.source_side, vec![true, false]);
    }

    #[test]
    fn diamond() {
        // s=0, a=1, b=2, t=3
        let mut g = FlowNetwork::new(4);
        g.add_arc(0, 1, 2.0);
        g.add_arc(0, 2, 2.0);
        g.add_arc(1, 3, 1.0);
        g.add_arc(2, 3, 1.0);
        g.add_arc(1, 2, 3.0);
        assert_eq!(g.min_cut(0, 3).value, 2.0);
    }

    #[test]
    fn disconnected_graph_has_zero_cut() {
        let mut g = FlowNetwork::new(4);
        g.add_arc(0, 1, 5.0);
        g.add_arc(2, 3, 5.0);
        let cut = g.min_cut(0, 3);
        assert_eq!(cut.value, 0.0);
        assert_eq!(cut.source_side, vec![true, true, false, false]);
    }

    #[test]
    fn infinite_arcs_are_never_cut() {
        let mut g = FlowNetwork::new(3);
        g.add_arc(0, 1, f64::INFINITY);
        g.add_arc(1, 2, 4.0);
        let cut = g.min_cut(0, 2);
        assert_eq!(cut.value, 4.0);
        assert!(cut.source_side[1]);
    }

    #[test]
    fn long_chain_does_not_recurse() {
        let n = 50_000;
        let mut g = FlowNetwork::new(n);
        for i in 0..n - 1 {
            g.add_arc(i, i + 1, 1.0 + (i % 7) as f64);
        }
        assert_eq!(g.min_cut(0, n - 1).value, 1.0);
    }
}
