//! Polynomial-time lower bounds on the GW distance.
//!
//! For every pair of networks, `GW ≥ TLB ≥ FLB ≥ SzLB` and `GW ≥ SLB`, where
//! each bound is an optimal transport problem on derived measures.

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::gw::check_pair;
use crate::matrix::Matrix;
use crate::metric::MetricPoint;
use crate::network::ZNetwork;
use crate::ot::{bottleneck_1d, solve_ot_1d, solve_ot_bottleneck, solve_ot_exact, wasserstein_in_z, Coupling};

/// Largest network size for which the second lower bound is computed.
pub const SLB_SIZE_CAP: usize = 64;
/// Slack allowed when checking the bound ordering.
pub const ORDER_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Kernel rows `ω(x, ·)`.
    Out,
    /// Kernel columns `ω(·, x)`.
    In,
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub p: Exponent,
    pub tlb: f64,
    pub flb: f64,
    pub szlb: f64,
    /// `None` when a network exceeds [`SLB_SIZE_CAP`].
    pub slb: Option<f64>,
    pub basepoint: MetricPoint,
    /// Optimal coupling of the third lower bound's transport problem.
    pub tlb_coupling: Coupling,
    /// Violations of `tlb ≥ flb ≥ szlb`; expected empty.
    pub ordering_violations: Vec<String>,
}

impl BoundReport {
    /// Named bound values that were computed.
    pub fn values(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![("tlb", self.tlb), ("flb", self.flb), ("szlb", self.szlb)];
        if let Some(s) = self.slb {
            v.push(("slb", s));
        }
        v
    }

    /// The largest computed bound.
    pub fn best(&self) -> f64 {
        self.values().into_iter().map(|(_, v)| v).fold(0.0, f64::max)
    }
}

fn oriented(net: &ZNetwork, direction: Direction) -> std::borrow::Cow<'_, ZNetwork> {
    match direction {
        Direction::Out => std::borrow::Cow::Borrowed(net),
        Direction::In => std::borrow::Cow::Owned(net.transposed()),
    }
}

/// Third lower bound: transport with cost `C(x, y) = W_p(ω_X(x,·)_*μ_X, ω_Y(y,·)_*μ_Y)`, halved.
pub fn tlb(x: &ZNetwork, y: &ZNetwork, p: Exponent, direction: Direction) -> Result<(f64, Coupling)> {
    check_pair(x, y)?;
    let (x, y) = (oriented(x, direction), oriented(y, direction));
    let (n, m) = (x.len(), y.len());
    let space = x.space();
    let mut cost = Matrix::filled(n, m, 0.0);
    for i in 0..n {
        for j in 0..m {
            cost[(i, j)] = wasserstein_in_z(space, x.kernel().row(i), x.weights(), y.kernel().row(j), y.weights(), p)?;
        }
    }
    match p {
        Exponent::Finite(q) => {
            let sol = solve_ot_exact(&cost.map(|c| c.powf(q)), x.weights(), y.weights())?;
            Ok((sol.value.max(0.0).powf(1.0 / q) / 2.0, sol.coupling))
        }
        Exponent::Infinite => {
            let sol = solve_ot_bottleneck(&cost, x.weights(), y.weights())?;
            Ok((sol.value / 2.0, sol.coupling))
        }
    }
}

/// First lower bound: half the `W_p` distance between pushforwards of the eccentricities.
pub fn flb(x: &ZNetwork, y: &ZNetwork, p: Exponent, z0: &MetricPoint, direction: Direction) -> Result<f64> {
    check_pair(x, y)?;
    let (ex, ey) = match direction {
        Direction::Out => (x.eccentricity_out(p, z0)?, y.eccentricity_out(p, z0)?),
        Direction::In => (x.eccentricity_in(p, z0)?, y.eccentricity_in(p, z0)?),
    };
    let w = match p {
        Exponent::Finite(q) => solve_ot_1d(&ex, x.weights(), &ey, y.weights(), q)?,
        Exponent::Infinite => bottleneck_1d(&ex, x.weights(), &ey, y.weights())?,
    };
    Ok(w / 2.0)
}

/// Size lower bound `½ |size_{p,z0}(X) - size_{p,z0}(Y)|`.
pub fn szlb(x: &ZNetwork, y: &ZNetwork, p: Exponent, z0: &MetricPoint) -> Result<f64> {
    check_pair(x, y)?;
    Ok((x.size(p, z0)? - y.size(p, z0)?).abs() / 2.0)
}

/// Second lower bound: half the `W_p` distance between the kernel pushforwards `ω_*(μ⊗μ)`.
pub fn slb(x: &ZNetwork, y: &ZNetwork, p: Exponent) -> Result<f64> {
    check_pair(x, y)?;
    let size = x.len().max(y.len());
    if size > SLB_SIZE_CAP {
        return Err(Error::SizeCap { size, cap: SLB_SIZE_CAP });
    }
    let (atoms_x, wx) = x.kernel_pushforward();
    let (atoms_y, wy) = y.kernel_pushforward();
    Ok(wasserstein_in_z(x.space(), &atoms_x, &wx, &atoms_y, &wy, p)? / 2.0)
}

/// All four bounds in the out direction, with the ordering checked.
///
/// `z0` defaults to the first kernel entry of `x`.
pub fn bound_report(x: &ZNetwork, y: &ZNetwork, p: Exponent, z0: Option<&MetricPoint>) -> Result<BoundReport> {
    bound_report_directed(x, y, p, z0, Direction::Out)
}

pub fn bound_report_directed(
    x: &ZNetwork,
    y: &ZNetwork,
    p: Exponent,
    z0: Option<&MetricPoint>,
    direction: Direction,
) -> Result<BoundReport> {
    check_pair(x, y)?;
    let basepoint = z0.cloned().unwrap_or_else(|| x.omega(0, 0).clone());
    x.space().check(&basepoint)?;
    let (tlb_value, tlb_coupling) = tlb(x, y, p, direction)?;
    let flb_value = flb(x, y, p, &basepoint, direction)?;
    let szlb_value = szlb(x, y, p, &basepoint)?;
    let slb_value = match slb(x, y, p) {
        Ok(v) => Some(v),
        Err(Error::SizeCap { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut ordering_violations = Vec::new();
    if tlb_value < flb_value - ORDER_TOL {
        ordering_violations.push(format!("tlb {tlb_value} < flb {flb_value}"));
    }
    if flb_value < szlb_value - ORDER_TOL {
        ordering_violations.push(format!("flb {flb_value} < szlb {szlb_value}"));
    }
    Ok(BoundReport {
        p,
        tlb: tlb_value,
        flb: flb_value,
        szlb: szlb_value,
        slb: slb_value,
        basepoint,
        tlb_coupling,
        ordering_violations,
    })
}
