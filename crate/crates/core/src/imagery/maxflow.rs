//! Dinic's maximum flow on a sparse graph with real capacities.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

const NONE: usize = usize::MAX;
const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Default)]
pub struct MaxFlow {
    head: Vec<usize>,
    next: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<f64>,
}

impl MaxFlow {
    pub fn new(nodes: usize) -> Self {
        MaxFlow { head: vec![NONE; nodes], ..Default::default() }
    }

    pub fn num_nodes(&self) -> usize {
        self.head.len()
    }

    /// Adds the arc pair `u -> v` (capacity `cap`) and `v -> u` (`rev_cap`).
    pub fn add_edge(&mut self, u: usize, v: usize, cap: f64, rev_cap: f64) {
        for (a, b, c) in [(u, v, cap), (v, u, rev_cap)] {
            self.to.push(b);
            self.cap.push(c.max(0.0));
            self.next.push(self.head[a]);
            self.head[a] = self.to.len() - 1;
        }
    }

    fn levels(&self, s: usize) -> Vec<i64> {
        let mut level = vec![-1i64; self.num_nodes()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let mut e = self.head[u];
            while e != NONE {
                let v = self.to[e];
                if self.cap[e] > EPS && level[v] < 0 {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
                e = self.next[e];
            }
        }
        level
    }

    /// Pushes the maximum flow from `s` to `t` and returns its value.
    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            let mut level = self.levels(s);
            if level[t] < 0 {
                return total;
            }
            let mut it = self.head.clone();
            let mut path: Vec<usize> = Vec::new();
            let mut u = s;
            loop {
                if u == t {
                    let f = path.iter().map(|&e| self.cap[e]).fold(f64::INFINITY, f64::min);
                    for &e in &path {
                        self.cap[e] -= f;
                        self.cap[e ^ 1] += f;
                    }
                    total += f;
                    let k = path.iter().position(|&e| self.cap[e] <= EPS).unwrap_or(0);
                    path.truncate(k);
                    u = path.last().map_or(s, |&e| self.to[e]);
                    continue;
                }
                let mut advanced = false;
                while it[u] != NONE {
                    let e = it[u];
                    let v = self.to[e];
                    if self.cap[e] > EPS && level[v] == level[u] + 1 {
                        path.push(e);
                        u = v;
                        advanced = true;
                        break;
                    }
                    it[u] = self.next[e];
                }
                if !advanced {
                    if u == s {
                        break;
                    }
                    level[u] = -1;
                    let e = path.pop().unwrap();
                    u = self.to[e ^ 1];
                    it[u] = self.next[it[u]];
                }
            }
        }
    }

    /// Nodes reachable from `s` in the residual graph (the source side of a
    /// minimum cut after [`max_flow`](Self::max_flow)).
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        self.levels(s).iter().map(|l| *l >= 0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn textbook_network() {
        // CLRS figure: max flow 23.
        let mut g = MaxFlow::new(6);
        for (u, v, c) in [(0, 1, 16.0), (0, 2, 13.0), (1, 3, 12.0), (2, 1, 4.0), (2, 4, 14.0), (3, 2, 9.0), (3, 5, 20.0), (4, 3, 7.0), (4, 5, 4.0)] {
            g.add_edge(u, v, c, 0.0);
        }
        assert!((g.max_flow(0, 5) - 23.0).abs() < 1e-12);
        let side = g.source_side(0);
        assert!(side[0] && !side[5]);
    }

    proptest! {
        #[test]
        fn flow_equals_brute_force_min_cut(caps in proptest::collection::vec(0u8..10, 30)) {
            // 6 nodes, source 0, sink 5; min cut by enumerating source sets.
            let n = 6;
            let mut g = MaxFlow::new(n);
            let mut edges = Vec::new();
            let mut k = 0;
            for u in 0..n {
                for v in 0..n {
                    if u != v {
                        let c = f64::from(caps[k]);
                        k += 1;
                        edges.push((u, v, c));
                        g.add_edge(u, v, c, 0.0);
                    }
                }
            }
            let flow = g.max_flow(0, 5);
            let mut best = f64::INFINITY;
            for set in 0u32..(1 << n) {
                if set & 1 == 0 || set & (1 << 5) != 0 {
                    continue;
                }
                let cut: f64 = edges.iter().filter(|(u, v, _)| set & (1 << u) != 0 && set & (1 << v) == 0).map(|e| e.2).sum();
                best = best.min(cut);
            }
            prop_assert!((flow - best).abs() < 1e-9);
            let side = g.source_side(0);
            let cut: f64 = edges.iter().filter(|(u, v, _)| side[*u] && !side[*v]).map(|e| e.2).sum();
            prop_assert!((cut - best).abs() < 1e-9);
        }
    }
}
