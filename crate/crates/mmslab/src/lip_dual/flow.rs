//! Uncapacitated min-cost flow by successive shortest paths with potentials.
//!
//! Each Dijkstra phase is followed by a blocking flow on the admissible
//! (zero reduced cost) subgraph. The final potentials are an optimal dual.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

pub(crate) struct FlowNet {
    n: usize,
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cost: Vec<f64>,
    cap: Vec<f64>,
}

pub(crate) struct FlowSolution {
    pub potential: Vec<f64>,
    pub cost: f64,
    pub converged: bool,
}

impl FlowNet {
    pub fn new(n: usize) -> Self {
        FlowNet {
            n,
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            cost: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_arc(&mut self, u: usize, v: usize, c: f64) {
        let a = self.to.len();
        self.to.push(v);
        self.cost.push(c);
        self.cap.push(f64::INFINITY);
        self.adj[u].push(a);
        self.to.push(u);
        self.cost.push(-c);
        self.cap.push(0.0);
        self.adj[v].push(a + 1);
    }

    /// Two opposite arcs of cost `c` and unlimited capacity.
    pub fn add_edge(&mut self, u: usize, v: usize, c: f64) {
        self.add_arc(u, v, c);
        self.add_arc(v, u, c);
    }

    pub fn solve(mut self, supply: &[f64]) -> FlowSolution {
        let n = self.n;
        let scale: f64 = supply.iter().map(|s| s.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
        let xtol = 1e-13 * scale;
        let max_cost = self.cost.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1.0);
        let rtol = 1e-12 * max_cost;
        let mut excess = supply.to_vec();
        let mut pot = vec![0.0; n];
        let mut dist = vec![f64::INFINITY; n];
        let mut level = vec![usize::MAX; n];
        let mut it = vec![0usize; n];
        let mut converged = false;

        for _phase in 0..(20 * n + 200) {
            if excess.iter().all(|&e| e <= xtol) {
                converged = true;
                break;
            }
            // Dijkstra on reduced costs from every node with surplus.
            dist.iter_mut().for_each(|d| *d = f64::INFINITY);
            let mut heap = BinaryHeap::new();
            for v in 0..n {
                if excess[v] > xtol {
                    dist[v] = 0.0;
                    heap.push(Reverse((0u64, v)));
                }
            }
            while let Some(Reverse((dbits, u))) = heap.pop() {
                let du = f64::from_bits(dbits);
                if du > dist[u] {
                    continue;
                }
                for &a in &self.adj[u] {
                    if self.cap[a] <= xtol {
                        continue;
                    }
                    let v = self.to[a];
                    let rc = (self.cost[a] + pot[u] - pot[v]).max(0.0);
                    let nd = du + rc;
                    if nd < dist[v] {
                        dist[v] = nd;
                        heap.push(Reverse((nd.to_bits(), v)));
                    }
                }
            }
            let far = dist
                .iter()
                .filter(|d| d.is_finite())
                .fold(0.0f64, |m, &d| m.max(d));
            for v in 0..n {
                pot[v] += if dist[v].is_finite() { dist[v] } else { far };
            }

            // Blocking flows on the admissible subgraph.
            loop {
                level.iter_mut().for_each(|l| *l = usize::MAX);
                let mut queue = VecDeque::new();
                for v in 0..n {
                    if excess[v] > xtol {
                        level[v] = 0;
                        queue.push_back(v);
                    }
                }
                let mut reached = false;
                while let Some(u) = queue.pop_front() {
                    if excess[u] < -xtol {
                        reached = true;
                    }
                    for &a in &self.adj[u] {
                        let v = self.to[a];
                        if level[v] == usize::MAX
                            && self.cap[a] > xtol
                            && self.cost[a] + pot[u] - pot[v] <= rtol
                        {
                            level[v] = level[u] + 1;
                            queue.push_back(v);
                        }
                    }
                }
                if !reached {
                    break;
                }
                it.iter_mut().for_each(|i| *i = 0);
                let mut pushed_any = false;
                for s in 0..n {
                    while excess[s] > xtol && level[s] == 0 {
                        let f = self.augment(s, &mut excess, &mut level, &mut it, &pot, xtol, rtol);
                        if f <= 0.0 {
                            break;
                        }
                        pushed_any = true;
                    }
                }
                if !pushed_any {
                    break;
                }
            }
        }

        let mut cost = 0.0;
        for a in (0..self.to.len()).step_by(2) {
            cost += self.cost[a] * self.cap[a + 1];
        }
        FlowSolution {
            potential: pot,
            cost,
            converged,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn augment(
        &mut self,
        s: usize,
        excess: &mut [f64],
        level: &mut [usize],
        it: &mut [usize],
        pot: &[f64],
        xtol: f64,
        rtol: f64,
    ) -> f64 {
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u != s && excess[u] < -xtol {
                let mut f = excess[s].min(-excess[u]);
                for &a in &path {
                    f = f.min(self.cap[a]);
                }
                for &a in &path {
                    if self.cap[a].is_finite() {
                        self.cap[a] -= f;
                    }
                    self.cap[a ^ 1] += f;
                }
                excess[s] -= f;
                excess[u] += f;
                return f;
            }
            let mut advanced = false;
            while it[u] < self.adj[u].len() {
                let a = self.adj[u][it[u]];
                let v = self.to[a];
                if level[v] != usize::MAX
                    && level[v] == level[u] + 1
                    && self.cap[a] > xtol
                    && self.cost[a] + pot[u] - pot[v] <= rtol
                {
                    path.push(a);
                    u = v;
                    advanced = true;
                    break;
                }
                it[u] += 1;
            }
            if !advanced {
                level[u] = usize::MAX;
                match path.pop() {
                    None => return 0.0,
                    Some(a) => {
                        u = self.to[a ^ 1];
                        it[u] += 1;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_flow_cost() {
        let mut net = FlowNet::new(3);
        net.add_edge(0, 1, 1.0);
        net.add_edge(1, 2, 2.0);
        net.add_edge(0, 2, 5.0);
        let sol = net.solve(&[1.0, 0.0, -1.0]);
        assert!(sol.converged);
        assert!((sol.cost - 3.0).abs() < 1e-12);
        assert!((sol.potential[2] - sol.potential[0] - 3.0).abs() < 1e-12);
    }
}
