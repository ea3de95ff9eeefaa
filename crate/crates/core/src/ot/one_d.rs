//! Transport on the real line via the monotone (quantile) coupling.

use super::check_marginals;
use crate::error::{Error, Result};

/// Moved mass below this is treated as rounding residue when taking maxima.
const MASS_EPS: f64 = 1e-12;

fn sorted_atoms(support: &[f64], weights: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if support.len() != weights.len() {
        return Err(Error::ShapeMismatch("support and weights differ in length".into()));
    }
    if support.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("support points must be finite".into()));
    }
    let mut idx: Vec<usize> = (0..support.len()).filter(|&k| weights[k] > 0.0).collect();
    idx.sort_by(|&a, &b| support[a].total_cmp(&support[b]));
    Ok((idx.iter().map(|&k| support[k]).collect(), idx.iter().map(|&k| weights[k]).collect()))
}

/// Walks the monotone coupling of two sorted measures, calling `visit(x, y, mass)`.
fn monotone_walk(xs: &[f64], wa: &[f64], ys: &[f64], wb: &[f64], mut visit: impl FnMut(f64, f64, f64)) {
    let ta: f64 = wa.iter().sum();
    let tb: f64 = wb.iter().sum();
    let scale = if tb > 0.0 { ta / tb } else { 1.0 };
    let (mut i, mut j) = (0, 0);
    let mut ra = wa.first().copied().unwrap_or(0.0);
    let mut rb = wb.first().copied().unwrap_or(0.0) * scale;
    while i < xs.len() && j < ys.len() {
        let q = ra.min(rb);
        visit(xs[i], ys[j], q);
        ra -= q;
        rb -= q;
        if ra <= rb {
            i += 1;
            if i < xs.len() {
                ra = wa[i];
            }
        } else {
            j += 1;
            if j < ys.len() {
                rb = wb[j] * scale;
            }
        }
    }
}

/// `W_p` for sorted supports with positive weights and equal mass.
pub(crate) fn wasserstein_1d_sorted(xs: &[f64], wa: &[f64], ys: &[f64], wb: &[f64], p: f64) -> f64 {
    let mut total = 0.0;
    monotone_walk(xs, wa, ys, wb, |x, y, q| {
        if q > 0.0 {
            total += q * (x - y).abs().powf(p);
        }
    });
    total.max(0.0).powf(1.0 / p)
}

/// `W_p` between two empirical measures on `R`, `p ∈ [1, ∞)`.
pub fn solve_ot_1d(support_a: &[f64], weights_a: &[f64], support_b: &[f64], weights_b: &[f64], p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!("1-D transport needs p in [1, inf), got {p}")));
    }
    check_marginals(weights_a, weights_b)?;
    let (xs, wa) = sorted_atoms(support_a, weights_a)?;
    let (ys, wb) = sorted_atoms(support_b, weights_b)?;
    Ok(wasserstein_1d_sorted(&xs, &wa, &ys, &wb, p))
}

/// `W_∞` between two empirical measures on `R`: the largest displacement of the monotone coupling.
pub fn bottleneck_1d(support_a: &[f64], weights_a: &[f64], support_b: &[f64], weights_b: &[f64]) -> Result<f64> {
    check_marginals(weights_a, weights_b)?;
    let (xs, wa) = sorted_atoms(support_a, weights_a)?;
    let (ys, wb) = sorted_atoms(support_b, weights_b)?;
    let mut worst: f64 = 0.0;
    monotone_walk(&xs, &wa, &ys, &wb, |x, y, q| {
        if q > MASS_EPS {
            worst = worst.max((x - y).abs());
        }
    });
    Ok(worst)
}
