//! Entropic transport, used for warm starts only; the result is approximate.

use super::{check_cost, check_marginals, Coupling};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Stop once the row-marginal residual falls below this.
pub const SINKHORN_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct SinkhornSolution {
    pub coupling: Coupling,
    /// `⟨π, cost⟩` of the returned (approximate) coupling.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub marginal_residual: f64,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + values.map(|v| (v - top).exp()).sum::<f64>().ln()
}

/// Log-domain Sinkhorn iterations with regularization `epsilon`.
///
/// Non-convergence within `max_iter` is reported in the result, not as an error.
pub fn sinkhorn(cost: &Matrix, mu: &[f64], nu: &[f64], epsilon: f64, max_iter: usize) -> Result<SinkhornSolution> {
    check_cost(cost, mu, nu)?;
    check_marginals(mu, nu)?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("entropic regularization must be > 0, got {epsilon}")));
    }
    let (n, m) = (mu.len(), nu.len());
    let log_mu: Vec<f64> = mu.iter().map(|w| w.ln()).collect();
    let log_nu: Vec<f64> = nu.iter().map(|w| w.ln()).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];
    let plan_entry = |f: &[f64], g: &[f64], i: usize, j: usize| {
        if mu[i] == 0.0 || nu[j] == 0.0 {
            0.0
        } else {
            ((f[i] + g[j] - cost[(i, j)]) / epsilon).exp()
        }
    };

    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < max_iter {
        for i in 0..n {
            if mu[i] > 0.0 {
                let lse = log_sum_exp((0..m).filter(|&j| nu[j] > 0.0).map(|j| (g[j] - cost[(i, j)]) / epsilon));
                f[i] = epsilon * (log_mu[i] - lse);
            }
        }
        for j in 0..m {
            if nu[j] > 0.0 {
                let lse = log_sum_exp((0..n).filter(|&i| mu[i] > 0.0).map(|i| (f[i] - cost[(i, j)]) / epsilon));
                g[j] = epsilon * (log_nu[j] - lse);
            }
        }
        iterations += 1;
        // Columns are exact after the g-update; measure the rows.
        residual = (0..n)
            .map(|i| ((0..m).map(|j| plan_entry(&f, &g, i, j)).sum::<f64>() - mu[i]).abs())
            .fold(0.0, f64::max);
        if residual <= SINKHORN_TOL {
            break;
        }
    }
    let plan = Matrix::from_fn(n, m, |i, j| plan_entry(&f, &g, i, j));
    let value = plan.data().iter().zip(cost.data()).map(|(p, c)| p * c).sum();
    Ok(SinkhornSolution {
        coupling: Coupling::from_parts(plan, mu, nu),
        value,
        iterations,
        converged: residual <= SINKHORN_TOL,
        marginal_residual: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_is_exact() {
        let s = sinkhorn(&Matrix::filled(1, 1, 2.0), &[1.0], &[1.0], 0.1, 10).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
        assert!(s.converged);
    }

    #[test]
    fn small_epsilon_approaches_exact() {
        let cost = Matrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = sinkhorn(&cost, &[0.5, 0.5], &[0.5, 0.5], 0.05, 10_000).unwrap();
        assert!(s.value < 1e-3, "{}", s.value);
        assert!(s.converged);
    }

    #[test]
    fn constant_cost_gives_product() {
        let cost = Matrix::filled(2, 3, 1.0);
        let mu = [0.3, 0.7];
        let nu = [0.2, 0.3, 0.5];
        let s = sinkhorn(&cost, &mu, &nu, 1.0, 100).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert!((s.coupling.get(i, j) - mu[i] * nu[j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_nonpositive_epsilon() {
        assert!(sinkhorn(&Matrix::filled(1, 1, 0.0), &[1.0], &[1.0], 0.0, 1).is_err());
    }
}
