//! Discrete optimal transport.

mod bottleneck;
mod exact;
mod one_d;
mod sinkhorn;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matrix::Matrix;
use crate::metric::{MetricPoint, SpaceDescriptor};

pub use bottleneck::{solve_ot_bottleneck, BottleneckSolution};
pub use exact::{solve_ot_exact, OtSolution};
pub use one_d::{bottleneck_1d, solve_ot_1d};
pub(crate) use one_d::wasserstein_1d_sorted;
pub use sinkhorn::{sinkhorn, SinkhornSolution};

/// Marginal sums must agree within this tolerance.
pub const MARGINAL_TOL: f64 = 1e-9;
/// Entries down to this negative value are treated as rounding noise.
pub const NEGATIVE_CLAMP: f64 = -1e-15;

/// A joint distribution with prescribed row and column marginals.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    matrix: Matrix,
    row_marginal: Vec<f64>,
    col_marginal: Vec<f64>,
}

impl Coupling {
    /// Validates `matrix` against `mu` (rows) and `nu` (columns).
    pub fn new(matrix: Matrix, mu: &[f64], nu: &[f64]) -> Result<Self> {
        if matrix.rows() != mu.len() || matrix.cols() != nu.len() {
            return Err(Error::ShapeMismatch(format!(
                "coupling is {}x{}, marginals have lengths {} and {}",
                matrix.rows(),
                matrix.cols(),
                mu.len(),
                nu.len()
            )));
        }
        if let Some(x) = matrix.data().iter().find(|x| !x.is_finite() || **x < NEGATIVE_CLAMP) {
            return Err(Error::InvalidCoupling(format!("entry {x} is negative or non-finite")));
        }
        let matrix = matrix.map(|x| x.max(0.0));
        let c = Coupling { matrix, row_marginal: mu.to_vec(), col_marginal: nu.to_vec() };
        let residual = c.marginal_residual();
        if residual > MARGINAL_TOL {
            return Err(Error::InvalidCoupling(format!("marginal residual {residual:e}")));
        }
        Ok(c)
    }

    /// Skips marginal checks; used for solver output that is feasible by construction.
    pub(crate) fn from_parts(matrix: Matrix, mu: &[f64], nu: &[f64]) -> Self {
        Coupling { matrix: matrix.map(|x| x.max(0.0)), row_marginal: mu.to_vec(), col_marginal: nu.to_vec() }
    }

    /// The independent coupling `μ ⊗ ν`.
    pub fn product(mu: &[f64], nu: &[f64]) -> Self {
        Coupling::from_parts(Matrix::from_fn(mu.len(), nu.len(), |i, j| mu[i] * nu[j]), mu, nu)
    }

    /// `(id × id)_* μ`, coupling a measure with itself.
    pub fn diagonal(mu: &[f64]) -> Self {
        let n = mu.len();
        Coupling::from_parts(Matrix::from_fn(n, n, |i, j| if i == j { mu[i] } else { 0.0 }), mu, mu)
    }

    /// The graph coupling `(id × f)_* μ` of a map `f: [n] → [m]`; column marginal is `f_* μ`.
    pub fn from_map(map: &[usize], mu: &[f64], m: usize) -> Result<Self> {
        if map.len() != mu.len() {
            return Err(Error::ShapeMismatch("map length differs from measure length".into()));
        }
        if let Some(&j) = map.iter().find(|&&j| j >= m) {
            return Err(Error::ShapeMismatch(format!("map target {j} out of range {m}")));
        }
        let mut nu = vec![0.0; m];
        for (i, &j) in map.iter().enumerate() {
            nu[j] += mu[i];
        }
        let matrix = Matrix::from_fn(mu.len(), m, |i, j| if map[i] == j { mu[i] } else { 0.0 });
        Ok(Coupling::from_parts(matrix, mu, &nu))
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn row_marginal(&self) -> &[f64] {
        &self.row_marginal
    }

    pub fn col_marginal(&self) -> &[f64] {
        &self.col_marginal
    }

    pub fn transpose(&self) -> Self {
        Coupling {
            matrix: self.matrix.transpose(),
            row_marginal: self.col_marginal.clone(),
            col_marginal: self.row_marginal.clone(),
        }
    }

    /// Cells `(i, j, π_ij)` with `π_ij > threshold`, in row-major order.
    pub fn support(&self, threshold: f64) -> Vec<(usize, usize, f64)> {
        let m = self.cols();
        self.matrix
            .data()
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > threshold)
            .map(|(k, &x)| (k / m, k % m, x))
            .collect()
    }

    /// Largest violation of either marginal constraint.
    pub fn marginal_residual(&self) -> f64 {
        let (n, m) = (self.rows(), self.cols());
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let s: f64 = self.matrix.row(i).iter().sum();
            worst = worst.max((s - self.row_marginal[i]).abs());
        }
        for j in 0..m {
            let s: f64 = (0..n).map(|i| self.matrix[(i, j)]).sum();
            worst = worst.max((s - self.col_marginal[j]).abs());
        }
        worst
    }

    /// `⟨π, cost⟩`.
    pub fn cost(&self, cost: &Matrix) -> f64 {
        self.matrix.data().iter().zip(cost.data()).map(|(p, c)| p * c).sum()
    }
}

/// Checks that two weight vectors carry equal mass and returns the row total.
pub(crate) fn check_marginals(mu: &[f64], nu: &[f64]) -> Result<f64> {
    if mu.is_empty() || nu.is_empty() {
        return Err(Error::Empty("transport marginal".into()));
    }
    if mu.iter().chain(nu).any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidWeights("transport marginals must be finite and nonnegative".into()));
    }
    let row: f64 = mu.iter().sum();
    let col: f64 = nu.iter().sum();
    if (row - col).abs() > MARGINAL_TOL {
        return Err(Error::InfeasibleMarginals { row, col });
    }
    if row <= 0.0 {
        return Err(Error::InvalidWeights("transport marginals carry no mass".into()));
    }
    Ok(row)
}

pub(crate) fn check_cost(cost: &Matrix, mu: &[f64], nu: &[f64]) -> Result<()> {
    if cost.rows() != mu.len() || cost.cols() != nu.len() {
        return Err(Error::ShapeMismatch(format!(
            "cost is {}x{}, marginals have lengths {} and {}",
            cost.rows(),
            cost.cols(),
            mu.len(),
            nu.len()
        )));
    }
    if cost.data().iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter("transport costs must be finite".into()));
    }
    Ok(())
}

/// Merges identical atoms, summing their weights and dropping zero mass.
fn merge_atoms(atoms: &[MetricPoint], weights: &[f64]) -> (Vec<MetricPoint>, Vec<f64>) {
    let mut out_atoms: Vec<MetricPoint> = Vec::new();
    let mut out_weights: Vec<f64> = Vec::new();
    for (a, &w) in atoms.iter().zip(weights) {
        if w <= 0.0 {
            continue;
        }
        match out_atoms.iter().position(|b| b == a) {
            Some(k) => out_weights[k] += w,
            None => {
                out_atoms.push(a.clone());
                out_weights.push(w);
            }
        }
    }
    (out_atoms, out_weights)
}

/// `W_p` between two finitely supported measures on a target space.
///
/// Finite `p` solves the exact LP on `d_Z^p` costs and returns the `1/p`-th
/// power; `p = ∞` uses the bottleneck solver on `d_Z` costs. On the real line
/// the sorted-atom formula is used.
pub fn wasserstein_in_z(
    desc: &SpaceDescriptor,
    atoms_a: &[MetricPoint],
    weights_a: &[f64],
    atoms_b: &[MetricPoint],
    weights_b: &[f64],
    p: Exponent,
) -> Result<f64> {
    if atoms_a.len() != weights_a.len() || atoms_b.len() != weights_b.len() {
        return Err(Error::ShapeMismatch("atom and weight counts differ".into()));
    }
    for z in atoms_a.iter().chain(atoms_b) {
        desc.check(z)?;
    }
    check_marginals(weights_a, weights_b)?;
    let (atoms_a, weights_a) = merge_atoms(atoms_a, weights_a);
    let (atoms_b, weights_b) = merge_atoms(atoms_b, weights_b);

    if *desc == SpaceDescriptor::Real {
        let xs = scalars(&atoms_a);
        let ys = scalars(&atoms_b);
        return match p {
            Exponent::Finite(p) => solve_ot_1d(&xs, &weights_a, &ys, &weights_b, p),
            Exponent::Infinite => bottleneck_1d(&xs, &weights_a, &ys, &weights_b),
        };
    }

    let dist = Matrix::from_fn(atoms_a.len(), atoms_b.len(), |i, j| desc.distance_unchecked(&atoms_a[i], &atoms_b[j]));
    match p {
        Exponent::Finite(p) => {
            let cost = dist.map(|d| d.powf(p));
            let sol = solve_ot_exact(&cost, &weights_a, &weights_b)?;
            Ok(sol.value.max(0.0).powf(1.0 / p))
        }
        Exponent::Infinite => Ok(solve_ot_bottleneck(&dist, &weights_a, &weights_b)?.value),
    }
}

fn scalars(points: &[MetricPoint]) -> Vec<f64> {
    points
        .iter()
        .map(|z| match z {
            MetricPoint::Scalar(x) => *x,
            _ => unreachable!("checked against the real line"),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_validation() {
        let mu = [0.5, 0.5];
        let ok = Matrix::from_vec(2, 2, vec![0.5, 0.0, -1e-16, 0.5]).unwrap();
        let c = Coupling::new(ok, &mu, &mu).unwrap();
        assert_eq!(c.get(1, 0), 0.0);
        let bad = Matrix::from_vec(2, 2, vec![0.5, 0.1, 0.0, 0.4]).unwrap();
        assert!(matches!(Coupling::new(bad, &mu, &mu), Err(Error::InvalidCoupling(_))));
        let neg = Matrix::from_vec(2, 2, vec![0.6, -0.1, -0.1, 0.6]).unwrap();
        assert!(Coupling::new(neg, &mu, &mu).is_err());
    }

    #[test]
    fn map_coupling_pushes_forward() {
        let c = Coupling::from_map(&[0, 0, 1], &[0.25, 0.25, 0.5], 2).unwrap();
        assert_eq!(c.col_marginal(), &[0.5, 0.5]);
        assert!(c.marginal_residual() < 1e-15);
        assert_eq!(c.support(0.0).len(), 3);
    }

    #[test]
    fn wasserstein_in_z_examples() {
        let s = |x: f64| MetricPoint::Scalar(x);
        let d = SpaceDescriptor::Real;
        let v = wasserstein_in_z(&d, &[s(0.0), s(1.0)], &[0.5, 0.5], &[s(1.0), s(0.0)], &[0.5, 0.5], Exponent::TWO);
        assert_eq!(v.unwrap(), 0.0);
        let v = wasserstein_in_z(&SpaceDescriptor::LambdaInf, &[s(2.0)], &[1.0], &[s(3.0)], &[1.0], Exponent::ONE);
        assert_eq!(v.unwrap(), 3.0);
        let v = wasserstein_in_z(&SpaceDescriptor::LambdaInf, &[s(2.0)], &[1.0], &[s(3.0)], &[1.0], Exponent::Infinite);
        assert_eq!(v.unwrap(), 3.0);
        let err = wasserstein_in_z(&d, &[s(0.0)], &[1.0], &[s(1.0)], &[0.5], Exponent::ONE);
        assert!(matches!(err, Err(Error::InfeasibleMarginals { .. })));
    }

    #[test]
    fn wasserstein_in_z_real_matches_lp() {
        let xs = [0.3, -1.2, 2.5, 0.0];
        let wa = [0.1, 0.4, 0.3, 0.2];
        let ys = [1.0, -0.5, 0.7];
        let wb = [0.5, 0.25, 0.25];
        let pa: Vec<_> = xs.iter().map(|x| MetricPoint::Scalar(*x)).collect();
        let pb: Vec<_> = ys.iter().map(|x| MetricPoint::Scalar(*x)).collect();
        // EuclideanLr with n = 1 is the same metric but goes through the LP.
        let line = SpaceDescriptor::EuclideanLr { n: 1, r: Exponent::TWO };
        let va: Vec<_> = xs.iter().map(|x| MetricPoint::Vector(vec![*x])).collect();
        let vb: Vec<_> = ys.iter().map(|x| MetricPoint::Vector(vec![*x])).collect();
        for p in [Exponent::ONE, Exponent::TWO, Exponent::Finite(3.5), Exponent::Infinite] {
            let fast = wasserstein_in_z(&SpaceDescriptor::Real, &pa, &wa, &pb, &wb, p).unwrap();
            let lp = wasserstein_in_z(&line, &va, &wa, &vb, &wb, p).unwrap();
            assert!((fast - lp).abs() < 1e-9, "p={p}: {fast} vs {lp}");
        }
    }
}
