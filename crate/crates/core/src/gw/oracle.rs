//! Exhaustive grid search over the transportation polytope for tiny instances.

use super::{check_pair, gw_exact_dirac, SUPPORT_THRESHOLD};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matrix::Matrix;
use crate::network::ZNetwork;
use crate::ot::Coupling;

/// Largest supported polytope dimension `(n-1)(m-1)`.
pub const MAX_ORACLE_DIMENSION: usize = 4;
/// Fewest grid steps per free variable.
pub const MIN_ORACLE_RESOLUTION: usize = 10;

#[derive(Clone, Debug)]
pub struct OracleResult {
    /// Smallest `distortion / 2` over the grid.
    pub value: f64,
    pub coupling: Coupling,
    pub grid_points: usize,
    pub dimension: usize,
}

/// Minimizes the distortion over a grid on the transportation polytope.
///
/// The free variables are `π_ij` for `i < n-1`, `j < m-1` in row-major
/// order; the last row and column are determined by the marginals. Each free
/// variable sweeps its exact feasible interval given the earlier ones (both
/// endpoints included), so every grid point is a coupling and every vertex of
/// the polytope is visited. The result is an upper bound on the GW distance
/// that converges as the resolution grows. Dirac instances are delegated to
/// the exact product-coupling evaluation.
pub fn brute_force_gw(x: &ZNetwork, y: &ZNetwork, p: Exponent, resolution: usize) -> Result<OracleResult> {
    check_pair(x, y)?;
    let (n, m) = (x.len(), y.len());
    let dimension = (n - 1) * (m - 1);
    if dimension > MAX_ORACLE_DIMENSION {
        return Err(Error::InvalidParameter(format!(
            "oracle needs (n-1)(m-1) <= {MAX_ORACLE_DIMENSION}, got {dimension}"
        )));
    }
    if resolution < MIN_ORACLE_RESOLUTION {
        return Err(Error::InvalidParameter(format!(
            "oracle resolution must be at least {MIN_ORACLE_RESOLUTION}, got {resolution}"
        )));
    }
    if x.dirac_index().is_some() || y.dirac_index().is_some() {
        let exact = gw_exact_dirac(x, y, p)?;
        return Ok(OracleResult { value: exact.value, coupling: exact.coupling, grid_points: 1, dimension });
    }

    let nm = n * m;
    let space = x.space();
    let raw: Vec<f64> = (0..nm * nm)
        .map(|ab| {
            let (a, b) = (ab / nm, ab % nm);
            space.distance_unchecked(x.omega(a / m, b / m), y.omega(a % m, b % m))
        })
        .collect();
    let scale = raw.iter().copied().fold(0.0, f64::max);
    let powered: Vec<f64> = match p {
        Exponent::Finite(p) if scale > 0.0 => raw.iter().map(|d| (d / scale).powf(p)).collect(),
        _ => raw.clone(),
    };
    let evaluate = |pi: &[f64]| -> f64 {
        match p {
            Exponent::Infinite => {
                let mut worst: f64 = 0.0;
                for a in (0..nm).filter(|&a| pi[a] > SUPPORT_THRESHOLD) {
                    for b in (0..nm).filter(|&b| pi[b] > SUPPORT_THRESHOLD) {
                        worst = worst.max(raw[a * nm + b]);
                    }
                }
                worst
            }
            Exponent::Finite(p) => {
                if scale == 0.0 {
                    return 0.0;
                }
                let mut s = 0.0;
                for a in 0..nm {
                    if pi[a] > 0.0 {
                        let row = &powered[a * nm..(a + 1) * nm];
                        s += pi[a] * row.iter().zip(pi).map(|(l, w)| l * w).sum::<f64>();
                    }
                }
                scale * s.max(0.0).powf(1.0 / p)
            }
        }
    };

    let mut search = Search {
        mu: x.weights(),
        nu: y.weights(),
        resolution,
        plan: vec![0.0; nm],
        best_value: f64::INFINITY,
        best_plan: Vec::new(),
        points: 0,
    };
    search.descend(0, &evaluate);
    let coupling = Coupling::from_parts(Matrix::from_vec(n, m, search.best_plan)?, x.weights(), y.weights());
    Ok(OracleResult { value: search.best_value / 2.0, coupling, grid_points: search.points, dimension })
}

struct Search<'a> {
    mu: &'a [f64],
    nu: &'a [f64],
    resolution: usize,
    plan: Vec<f64>,
    best_value: f64,
    best_plan: Vec<f64>,
    points: usize,
}

impl Search<'_> {
    fn dims(&self) -> (usize, usize) {
        (self.mu.len(), self.nu.len())
    }

    /// Free cell `k` in row-major order over the leading `(n-1) × (m-1)` block.
    fn free_cell(&self, k: usize) -> (usize, usize) {
        let (_, m) = self.dims();
        (k / (m - 1), k % (m - 1))
    }

    fn is_fixed(&self, i: usize, j: usize, fixed: usize) -> bool {
        let (n, m) = self.dims();
        i < n - 1 && j < m - 1 && i * (m - 1) + j < fixed
    }

    /// Feasible interval for free cell `k` given the first `k` free cells.
    ///
    /// The remaining cells can complete the coupling iff every row subset `S`
    /// satisfies `Σ_S r_i ≤ Σ_{N(S)} c_j` on residual masses, where `N(S)` is
    /// the set of columns reachable from `S` through unfixed cells. Each such
    /// condition is linear in the new cell's value.
    fn interval(&self, k: usize) -> Option<(f64, f64)> {
        let (n, m) = self.dims();
        let (i0, j0) = self.free_cell(k);
        let mut row_res: Vec<f64> = self.mu.to_vec();
        let mut col_res: Vec<f64> = self.nu.to_vec();
        for i in 0..n {
            for j in 0..m {
                if self.is_fixed(i, j, k) {
                    row_res[i] -= self.plan[i * m + j];
                    col_res[j] -= self.plan[i * m + j];
                }
            }
        }
        let mut lo: f64 = 0.0;
        let mut hi = row_res[i0].min(col_res[j0]);
        for subset in 1u32..(1 << n) {
            let in_s = |i: usize| subset & (1 << i) != 0;
            let mut reach = vec![false; m];
            for i in (0..n).filter(|&i| in_s(i)) {
                for j in 0..m {
                    if !self.is_fixed(i, j, k + 1) {
                        reach[j] = true;
                    }
                }
            }
            let supply: f64 = (0..n).filter(|&i| in_s(i)).map(|i| row_res[i]).sum();
            let demand: f64 = (0..m).filter(|&j| reach[j]).map(|j| col_res[j]).sum();
            let coeff = i32::from(reach[j0]) - i32::from(in_s(i0));
            // supply - [i0 ∈ S]·t ≤ demand - [j0 ∈ N(S)]·t
            let slack = demand - supply;
            match coeff {
                1 => hi = hi.min(slack),
                -1 => lo = lo.max(-slack),
                _ => {}
            }
        }
        if hi < lo {
            if lo - hi > 1e-9 {
                return None;
            }
            let mid = 0.5 * (lo + hi);
            return Some((mid, mid));
        }
        Some((lo, hi))
    }

    fn complete(&mut self) {
        let (n, m) = self.dims();
        for i in 0..n - 1 {
            let s: f64 = (0..m - 1).map(|j| self.plan[i * m + j]).sum();
            self.plan[i * m + m - 1] = (self.mu[i] - s).max(0.0);
        }
        for j in 0..m - 1 {
            let s: f64 = (0..n - 1).map(|i| self.plan[i * m + j]).sum();
            self.plan[(n - 1) * m + j] = (self.nu[j] - s).max(0.0);
        }
        let s: f64 = (0..m - 1).map(|j| self.plan[(n - 1) * m + j]).sum();
        self.plan[n * m - 1] = (self.mu[n - 1] - s).max(0.0);
    }

    fn descend(&mut self, k: usize, evaluate: &impl Fn(&[f64]) -> f64) {
        let (n, m) = self.dims();
        if k == (n - 1) * (m - 1) {
            self.complete();
            self.points += 1;
            let v = evaluate(&self.plan);
            if v < self.best_value {
                self.best_value = v;
                self.best_plan = self.plan.clone();
            }
            return;
        }
        let Some((lo, hi)) = self.interval(k) else { return };
        let (i, j) = self.free_cell(k);
        let steps = if hi > lo { self.resolution } else { 0 };
        for t in 0..=steps {
            self.plan[i * m + j] = if t == steps { hi } else { lo + (hi - lo) * t as f64 / steps as f64 };
            self.descend(k + 1, evaluate);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{MetricPoint, SpaceDescriptor};

    fn real(weights: Vec<f64>, rows: Vec<Vec<f64>>) -> ZNetwork {
        let k = Matrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(MetricPoint::Scalar).collect()).collect()).unwrap();
        ZNetwork::with_default_labels(SpaceDescriptor::Real, weights, k).unwrap()
    }

    #[test]
    fn frozen_two_point_value() {
        // Distortion over π = [[a, 1/2-a], [1/2-a, a]] is 1/2 + 8a(1/2-a), minimized at the vertices.
        let x = real(vec![0.5, 0.5], vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let y = real(vec![0.5, 0.5], vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        let r = brute_force_gw(&x, &y, Exponent::ONE, 10_000).unwrap();
        assert!((r.value - 0.25).abs() < 1e-15, "{}", r.value);
        assert_eq!(r.grid_points, 10_001);
    }

    #[test]
    fn identical_networks_reach_zero() {
        let x = real(vec![0.3, 0.7], vec![vec![0.0, 1.0], vec![4.0, 2.0]]);
        assert_eq!(brute_force_gw(&x, &x, Exponent::TWO, 10).unwrap().value, 0.0);
        assert_eq!(brute_force_gw(&x, &x, Exponent::Infinite, 10).unwrap().value, 0.0);
    }

    #[test]
    fn grid_points_are_couplings() {
        let x = real(vec![0.2, 0.3, 0.5], vec![vec![0.0, 1.0, 2.0]; 3]);
        let y = real(vec![0.6, 0.1, 0.3], vec![vec![1.0, 0.0, 2.0]; 3]);
        let r = brute_force_gw(&x, &y, Exponent::TWO, 10).unwrap();
        assert!(r.coupling.marginal_residual() < 1e-12);
        assert_eq!(r.dimension, 4);
    }

    #[test]
    fn interval_search_covers_polytope_vertices() {
        // With uneven marginals the polytope is a segment; both ends must be visited.
        let x = real(vec![0.25, 0.75], vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let y = real(vec![0.5, 0.5], vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let r = brute_force_gw(&x, &y, Exponent::Infinite, 10).unwrap();
        // Every coupling puts mass on both columns from row 1, so distortion ∞ is 1.
        assert_eq!(r.value, 0.5);
    }

    #[test]
    fn rejects_large_or_coarse() {
        let x = real(vec![1.0 / 3.0; 3], vec![vec![0.0; 3]; 3]);
        let y = real(vec![0.25; 4], vec![vec![0.0; 4]; 4]);
        assert!(brute_force_gw(&x, &y, Exponent::ONE, 10).is_err());
        assert!(brute_force_gw(&x, &x, Exponent::ONE, 5).is_err());
    }
}
