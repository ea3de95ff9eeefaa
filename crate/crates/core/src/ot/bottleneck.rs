//! `p = ∞` transport: the smallest cost threshold admitting a coupling.

use super::{check_cost, check_marginals, Coupling, MARGINAL_TOL};
use crate::error::Result;
use crate::matrix::Matrix;

#[derive(Clone, Debug)]
pub struct BottleneckSolution {
    /// Smallest `τ` among cost entries with a coupling supported on `{cost ≤ τ}`.
    pub value: f64,
    /// A coupling supported on `{cost ≤ value}`.
    pub coupling: Coupling,
}

/// Exact bottleneck transport by binary search over the distinct cost values,
/// with feasibility decided by max-flow.
pub fn solve_ot_bottleneck(cost: &Matrix, mu: &[f64], nu: &[f64]) -> Result<BottleneckSolution> {
    check_cost(cost, mu, nu)?;
    let total = check_marginals(mu, nu)?;
    let col_total: f64 = nu.iter().sum();
    let nu_scaled: Vec<f64> = nu.iter().map(|w| w * total / col_total).collect();

    // Only cells between atoms of positive mass matter.
    let mut levels: Vec<f64> = Vec::new();
    for i in (0..mu.len()).filter(|&i| mu[i] > 0.0) {
        for j in (0..nu.len()).filter(|&j| nu[j] > 0.0) {
            levels.push(cost[(i, j)]);
        }
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    let mut best = feasible_flow(cost, mu, &nu_scaled, levels[hi], total);
    debug_assert!(best.is_some(), "the full support is always feasible");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match feasible_flow(cost, mu, &nu_scaled, levels[mid], total) {
            Some(plan) => {
                hi = mid;
                best = Some(plan);
            }
            None => lo = mid + 1,
        }
    }
    let plan = best.unwrap_or_else(|| Matrix::from_fn(mu.len(), nu.len(), |i, j| mu[i] * nu_scaled[j] / total));
    Ok(BottleneckSolution { value: levels[hi], coupling: Coupling::from_parts(plan, mu, nu) })
}

fn feasible_flow(cost: &Matrix, mu: &[f64], nu: &[f64], threshold: f64, total: f64) -> Option<Matrix> {
    let (n, m) = (mu.len(), nu.len());
    let source = n + m;
    let sink = n + m + 1;
    let mut net = FlowNetwork::new(n + m + 2);
    for (i, &w) in mu.iter().enumerate() {
        if w > 0.0 {
            net.add_edge(source, i, w);
        }
    }
    for (j, &w) in nu.iter().enumerate() {
        if w > 0.0 {
            net.add_edge(n + j, sink, w);
        }
    }
    let mut cell_edges = Vec::new();
    for i in (0..n).filter(|&i| mu[i] > 0.0) {
        for j in (0..m).filter(|&j| nu[j] > 0.0) {
            if cost[(i, j)] <= threshold {
                cell_edges.push((i, j, net.add_edge(i, n + j, f64::INFINITY)));
            }
        }
    }
    let flow = net.max_flow(source, sink);
    if flow < total - MARGINAL_TOL {
        return None;
    }
    let mut plan = Matrix::filled(n, m, 0.0);
    for (i, j, e) in cell_edges {
        plan[(i, j)] = net.flow_on(e);
    }
    Some(plan)
}

/// Dinic's algorithm on real capacities.
struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
}

const FLOW_EPS: f64 = 1e-15;

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork { head: vec![Vec::new(); nodes], to: Vec::new(), cap: Vec::new() }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: f64) -> usize {
        let e = self.to.len();
        self.head[from].push(e);
        self.to.push(to);
        self.cap.push(cap);
        self.head[to].push(e + 1);
        self.to.push(from);
        self.cap.push(0.0);
        e
    }

    fn flow_on(&self, e: usize) -> f64 {
        self.cap[e ^ 1]
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.head.len()];
        level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > FLOW_EPS && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level
    }

    fn augment(&mut self, u: usize, t: usize, pushed: f64, level: &[usize], next: &mut [usize]) -> f64 {
        if u == t {
            return pushed;
        }
        while next[u] < self.head[u].len() {
            let e = self.head[u][next[u]];
            let v = self.to[e];
            if self.cap[e] > FLOW_EPS && level[v] == level[u] + 1 {
                let got = self.augment(v, t, pushed.min(self.cap[e]), level, next);
                if got > 0.0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            next[u] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        loop {
            let level = self.levels(s);
            if level[t] == usize::MAX {
                return flow;
            }
            let mut next = vec![0; self.head.len()];
            loop {
                let got = self.augment(s, t, f64::INFINITY, &level, &mut next);
                if got <= 0.0 {
                    break;
                }
                flow += got;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let one = Matrix::filled(1, 1, 4.0);
        assert_eq!(solve_ot_bottleneck(&one, &[1.0], &[1.0]).unwrap().value, 4.0);
        let diag = Matrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = solve_ot_bottleneck(&diag, &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert_eq!(s.value, 0.0);
        assert!(s.coupling.marginal_residual() < 1e-12);
        let c = Matrix::filled(2, 3, 1.5);
        assert_eq!(solve_ot_bottleneck(&c, &[0.5, 0.5], &[0.2, 0.3, 0.5]).unwrap().value, 1.5);
    }

    #[test]
    fn forced_expensive_cell() {
        // Row 0 has mass 0.75 but column 0 only accepts 0.5.
        let cost = Matrix::from_rows(vec![vec![0.0, 9.0], vec![5.0, 1.0]]).unwrap();
        let s = solve_ot_bottleneck(&cost, &[0.75, 0.25], &[0.5, 0.5]).unwrap();
        assert_eq!(s.value, 9.0);
        let cost = Matrix::from_rows(vec![vec![0.0, 2.0], vec![5.0, 1.0]]).unwrap();
        assert_eq!(solve_ot_bottleneck(&cost, &[0.75, 0.25], &[0.5, 0.5]).unwrap().value, 2.0);
    }

    #[test]
    fn zero_mass_rows_ignored() {
        let cost = Matrix::from_rows(vec![vec![1.0], vec![100.0]]).unwrap();
        assert_eq!(solve_ot_bottleneck(&cost, &[1.0, 0.0], &[1.0]).unwrap().value, 1.0);
    }
}
