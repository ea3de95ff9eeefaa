//! Exact transport by the transportation simplex method.

use super::{check_cost, check_marginals, Coupling};
use crate::error::Result;
use crate::matrix::Matrix;

/// Optimal coupling with its dual certificate.
#[derive(Clone, Debug)]
pub struct OtSolution {
    pub coupling: Coupling,
    /// `⟨π, cost⟩`.
    pub value: f64,
    pub row_potential: Vec<f64>,
    pub col_potential: Vec<f64>,
    /// Largest violation of dual feasibility or complementary slackness.
    pub certificate_residual: f64,
    pub pivots: usize,
}

/// Solves `min ⟨π, cost⟩` over couplings of `mu` and `nu`.
///
/// Zero-mass atoms are dropped; if the totals differ by at most `1e-9`
/// the column marginal is rescaled to the row total. Pivoting uses the most
/// negative reduced cost and falls back to Bland's rule if the pivot count
/// grows large, so degenerate instances terminate. Output is deterministic.
pub fn solve_ot_exact(cost: &Matrix, mu: &[f64], nu: &[f64]) -> Result<OtSolution> {
    check_cost(cost, mu, nu)?;
    let total = check_marginals(mu, nu)?;
    let rows: Vec<usize> = (0..mu.len()).filter(|&i| mu[i] > 0.0).collect();
    let cols: Vec<usize> = (0..nu.len()).filter(|&j| nu[j] > 0.0).collect();
    let a: Vec<f64> = rows.iter().map(|&i| mu[i]).collect();
    let col_total: f64 = cols.iter().map(|&j| nu[j]).sum();
    let b: Vec<f64> = cols.iter().map(|&j| nu[j] * total / col_total).collect();
    let sub = Matrix::from_fn(rows.len(), cols.len(), |r, c| cost[(rows[r], cols[c])]);

    let mut simplex = Simplex::north_west(&sub, &a, &b);
    let pivots = simplex.run();
    let (u_sub, v_sub) = simplex.potentials();

    let (n, m) = (mu.len(), nu.len());
    let mut plan = Matrix::filled(n, m, 0.0);
    for (&(r, c), &x) in simplex.cells.iter().zip(&simplex.flow) {
        plan[(rows[r], cols[c])] += x.max(0.0);
    }

    // Extend duals to dropped atoms so that the certificate covers every cell.
    let mut u = vec![f64::NAN; n];
    let mut v = vec![f64::NAN; m];
    for (r, &i) in rows.iter().enumerate() {
        u[i] = u_sub[r];
    }
    for (c, &j) in cols.iter().enumerate() {
        v[j] = v_sub[c];
    }
    for i in 0..n {
        if u[i].is_nan() {
            u[i] = cols.iter().map(|&j| cost[(i, j)] - v[j]).fold(f64::INFINITY, f64::min);
        }
    }
    for j in 0..m {
        if v[j].is_nan() {
            v[j] = (0..n).map(|i| cost[(i, j)] - u[i]).fold(f64::INFINITY, f64::min);
        }
    }

    let mut residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..m {
            let reduced = cost[(i, j)] - u[i] - v[j];
            residual = residual.max(-reduced);
            if plan[(i, j)] > 0.0 {
                residual = residual.max(reduced.abs());
            }
        }
    }

    let value = plan.data().iter().zip(cost.data()).map(|(p, c)| p * c).sum();
    Ok(OtSolution {
        coupling: Coupling::from_parts(plan, mu, nu),
        value,
        row_potential: u,
        col_potential: v,
        certificate_residual: residual,
        pivots,
    })
}

/// A basic feasible solution: `n + m - 1` cells forming a spanning tree of
/// the bipartite row/column graph.
struct Simplex<'a> {
    cost: &'a Matrix,
    cells: Vec<(usize, usize)>,
    flow: Vec<f64>,
}

impl<'a> Simplex<'a> {
    fn north_west(cost: &'a Matrix, a: &[f64], b: &[f64]) -> Self {
        let (n, m) = (a.len(), b.len());
        let mut ra = a.to_vec();
        let mut rb = b.to_vec();
        let mut cells = Vec::with_capacity(n + m - 1);
        let mut flow = Vec::with_capacity(n + m - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let q = ra[i].min(rb[j]).max(0.0);
            cells.push((i, j));
            flow.push(q);
            ra[i] -= q;
            rb[j] -= q;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if i == n - 1 {
                j += 1;
            } else if j == m - 1 || ra[i] <= rb[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        // The last cell absorbs rounding so that marginals match exactly.
        let last = flow.len() - 1;
        flow[last] += ra[n - 1].max(0.0).min(rb[m - 1].max(0.0));
        Simplex { cost, cells, flow }
    }

    fn nodes(&self) -> (usize, usize) {
        (self.cost.rows(), self.cost.cols())
    }

    /// Edge lists per node; rows are nodes `0..n`, columns `n..n+m`.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let (n, m) = self.nodes();
        let mut adj = vec![Vec::new(); n + m];
        for (e, &(i, j)) in self.cells.iter().enumerate() {
            adj[i].push(e);
            adj[n + j].push(e);
        }
        adj
    }

    fn potentials(&self) -> (Vec<f64>, Vec<f64>) {
        let (n, m) = self.nodes();
        let adj = self.adjacency();
        let mut u = vec![0.0; n];
        let mut v = vec![0.0; m];
        let mut seen = vec![false; n + m];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(node) = stack.pop() {
            for &e in &adj[node] {
                let (i, j) = self.cells[e];
                let c = self.cost[(i, j)];
                if node < n {
                    if !seen[n + j] {
                        v[j] = c - u[i];
                        seen[n + j] = true;
                        stack.push(n + j);
                    }
                } else if !seen[i] {
                    u[i] = c - v[j];
                    seen[i] = true;
                    stack.push(i);
                }
            }
        }
        (u, v)
    }

    /// Tree edges on the path from row `i` to column `j`, starting at row `i`.
    fn path(&self, adj: &[Vec<usize>], i: usize, j: usize) -> Vec<usize> {
        let (n, m) = self.nodes();
        let mut parent_edge = vec![usize::MAX; n + m];
        let mut seen = vec![false; n + m];
        let mut stack = vec![i];
        seen[i] = true;
        while let Some(node) = stack.pop() {
            if node == n + j {
                break;
            }
            for &e in &adj[node] {
                let (r, c) = self.cells[e];
                let next = if node < n { n + c } else { r };
                if !seen[next] {
                    seen[next] = true;
                    parent_edge[next] = e;
                    stack.push(next);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = n + j;
        while node != i {
            let e = parent_edge[node];
            path.push(e);
            let (r, c) = self.cells[e];
            node = if node < n { n + c } else { r };
        }
        path.reverse();
        path
    }

    fn run(&mut self) -> usize {
        let (n, m) = self.nodes();
        let scale = self.cost.data().iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
        if scale == 0.0 || n == 1 || m == 1 {
            return 0;
        }
        let eps = 1e-12 * scale;
        let bland_after = 20 * n * m + 1000;
        let hard_cap = 200 * n * m + 100_000;
        let mut pivots = 0;
        while pivots < hard_cap {
            let (u, v) = self.potentials();
            let mut entering = None;
            let mut best = -eps;
            'scan: for i in 0..n {
                for j in 0..m {
                    let r = self.cost[(i, j)] - u[i] - v[j];
                    if r < best {
                        entering = Some((i, j));
                        if pivots >= bland_after {
                            break 'scan;
                        }
                        best = r;
                    }
                }
            }
            let Some((ei, ej)) = entering else { break };
            let adj = self.adjacency();
            let path = self.path(&adj, ei, ej);
            // Edges at even positions leave the entering row/column side and lose mass.
            let mut theta = f64::INFINITY;
            let mut leaving = usize::MAX;
            for &e in path.iter().step_by(2) {
                let f = self.flow[e];
                let (r, c) = self.cells[e];
                let better = f < theta
                    || (f == theta && {
                        let (lr, lc) = self.cells[leaving];
                        r * m + c < lr * m + lc
                    });
                if better {
                    theta = f;
                    leaving = e;
                }
            }
            let theta = theta.max(0.0);
            for (k, &e) in path.iter().enumerate() {
                if k % 2 == 0 {
                    self.flow[e] = (self.flow[e] - theta).max(0.0);
                } else {
                    self.flow[e] += theta;
                }
            }
            self.cells[leaving] = (ei, ej);
            self.flow[leaving] = theta;
            pivots += 1;
        }
        pivots
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: Vec<Vec<f64>>) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn single_cell() {
        let s = solve_ot_exact(&mat(vec![vec![3.5]]), &[1.0], &[1.0]).unwrap();
        assert_eq!(s.value, 3.5);
        assert_eq!(s.coupling.get(0, 0), 1.0);
    }

    #[test]
    fn anti_diagonal_cost_gives_diagonal_plan() {
        let s = solve_ot_exact(&mat(vec![vec![0.0, 1.0], vec![1.0, 0.0]]), &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.coupling.get(0, 0), 0.5);
        assert_eq!(s.coupling.get(1, 1), 0.5);
        assert!(s.certificate_residual <= 1e-12);
    }

    #[test]
    fn needs_pivots() {
        // North-west corner starts on the expensive diagonal.
        let cost = mat(vec![vec![5.0, 1.0, 3.0], vec![1.0, 5.0, 3.0], vec![3.0, 3.0, 0.0]]);
        let u = [1.0 / 3.0; 3];
        let s = solve_ot_exact(&cost, &u, &u).unwrap();
        assert!((s.value - 2.0 / 3.0).abs() < 1e-12, "{}", s.value);
        assert!(s.pivots > 0);
        assert!(s.coupling.marginal_residual() < 1e-12);
        assert!(s.certificate_residual < 1e-12);
    }

    #[test]
    fn constant_cost() {
        let cost = Matrix::filled(3, 2, 2.0);
        let s = solve_ot_exact(&cost, &[0.2, 0.3, 0.5], &[0.6, 0.4]).unwrap();
        assert!((s.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_atoms_are_dropped() {
        let cost = mat(vec![vec![1.0, 0.0], vec![-4.0, 2.0]]);
        let s = solve_ot_exact(&cost, &[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert_eq!(s.value, 0.5);
        assert_eq!(s.coupling.get(1, 0), 0.0);
        assert!(s.certificate_residual < 1e-12);
    }

    #[test]
    fn infeasible_marginals() {
        let cost = Matrix::filled(1, 1, 0.0);
        assert!(solve_ot_exact(&cost, &[1.0], &[0.9]).is_err());
    }

    #[test]
    fn tiny_mismatch_is_rescaled() {
        let cost = mat(vec![vec![0.0, 1.0]]);
        let s = solve_ot_exact(&cost, &[1.0], &[0.5, 0.5 + 5e-10]).unwrap();
        assert!((s.value - 0.5).abs() < 1e-9);
    }
}
