//! Explicit paths between networks: mixtures over a disjoint union,
//! contractions to a point, and geodesics built from a coupling.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::gw::{brute_force_gw, check_coupling, check_pair, distortion, gw_exact_dirac, MIN_ORACLE_RESOLUTION};
use crate::matrix::Matrix;
use crate::metric::{MetricPoint, SpaceDescriptor};
use crate::network::ZNetwork;
use crate::ot::Coupling;

/// Label of the extra point added by contraction paths.
pub const APEX_LABEL: &str = "*";
/// Largest weight discrepancy tolerated between networks on a shared carrier.
pub const CARRIER_TOL: f64 = 1e-12;

fn check_time(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("path time {t} outside [0, 1]")))
    }
}

fn finite_p(p: Exponent) -> Result<f64> {
    match p {
        Exponent::Finite(q) => Ok(q),
        Exponent::Infinite => Err(Error::InvalidParameter("Hölder estimates need a finite p".into())),
    }
}

/// The network on `X ⊔ Y` with kernel `ω_X`, `ω_Y` on the diagonal blocks,
/// `z_fill` on the cross blocks and weights `((1-t)μ_X, tμ_Y)`.
pub fn mixture_path(x: &ZNetwork, y: &ZNetwork, z_fill: &MetricPoint, t: f64) -> Result<ZNetwork> {
    check_pair(x, y)?;
    check_time(t)?;
    x.space().check(z_fill)?;
    let (n, m) = (x.len(), y.len());
    let kernel = Matrix::from_fn(n + m, n + m, |a, b| match (a < n, b < n) {
        (true, true) => x.omega(a, b).clone(),
        (false, false) => y.omega(a - n, b - n).clone(),
        _ => z_fill.clone(),
    });
    let weights = x.weights().iter().map(|w| (1.0 - t) * w).chain(y.weights().iter().map(|w| t * w)).collect();
    let labels = x
        .labels()
        .iter()
        .map(|l| format!("x:{l}"))
        .chain(y.labels().iter().map(|l| format!("y:{l}")))
        .collect();
    ZNetwork::new(x.space().clone(), labels, weights, kernel)
}

/// The network on `X ⊔ {⋆}` with `z` on every pair touching `⋆` and weights `((1-t)μ, t)`.
pub fn contraction_path(net: &ZNetwork, z: &MetricPoint, t: f64) -> Result<ZNetwork> {
    check_time(t)?;
    net.space().check(z)?;
    let n = net.len();
    let kernel = Matrix::from_fn(n + 1, n + 1, |a, b| if a < n && b < n { net.omega(a, b).clone() } else { z.clone() });
    let weights = net.weights().iter().map(|w| (1.0 - t) * w).chain(std::iter::once(t)).collect();
    let labels = net.labels().iter().cloned().chain(std::iter::once(APEX_LABEL.to_string())).collect();
    ZNetwork::new(net.space().clone(), labels, weights, kernel)
}

/// Coupling of `part` with `whole` sending point `i` to `offset + i`.
///
/// Valid when `whole` carries exactly the weights of `part` on that block and
/// nothing elsewhere; its distortion is zero iff the kernels agree there.
pub fn inclusion_coupling(part: &ZNetwork, whole: &ZNetwork, offset: usize) -> Result<Coupling> {
    let (n, total) = (part.len(), whole.len());
    if offset + n > total {
        return Err(Error::ShapeMismatch(format!("block {offset}..{} exceeds {total} points", offset + n)));
    }
    let matrix = Matrix::from_fn(n, total, |i, j| if j == offset + i { part.weights()[i] } else { 0.0 });
    Coupling::new(matrix, part.weights(), whole.weights())
}

/// `π_{s,t} = (1-t)Δ^X + (t-s)π + sΔ^Y` between the mixture networks at `s ≤ t`.
pub fn mixture_coupling(x: &ZNetwork, y: &ZNetwork, pi: &Coupling, s: f64, t: f64) -> Result<Coupling> {
    check_coupling(x, y, pi)?;
    check_time(s)?;
    check_time(t)?;
    if s > t {
        return Err(Error::InvalidParameter(format!("mixture coupling needs s <= t, got {s} > {t}")));
    }
    let (n, m) = (x.len(), y.len());
    let matrix = Matrix::from_fn(n + m, n + m, |a, b| match (a < n, b < n) {
        (true, true) if a == b => (1.0 - t) * x.weights()[a],
        (true, false) => (t - s) * pi.get(a, b - n),
        (false, false) if a == b => s * y.weights()[a - n],
        _ => 0.0,
    });
    let row: Vec<f64> = x.weights().iter().map(|w| (1.0 - s) * w).chain(y.weights().iter().map(|w| s * w)).collect();
    let col: Vec<f64> = x.weights().iter().map(|w| (1.0 - t) * w).chain(y.weights().iter().map(|w| t * w)).collect();
    Coupling::new(matrix, &row, &col)
}

/// Both sides of the Hölder continuity estimate along a path, at one `(s, t)` pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderCheck {
    pub s: f64,
    pub t: f64,
    /// `distortion(π_{s,t}) / 2`, an upper bound on `GW(X_s, X_t)`.
    pub gw_upper: f64,
    /// The right-hand side of the estimate.
    pub bound: f64,
}

impl HolderCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.gw_upper <= self.bound + tol
    }
}

/// `Σ A_a B_b d(ω(a_u, b_u), ω(a_v, b_v))^p` for sparse measures on `U × U`.
fn cross_integral(net: &ZNetwork, a: &[(usize, usize, f64)], b: &[(usize, usize, f64)], p: f64) -> f64 {
    let space = net.space();
    let mut total = 0.0;
    for &(u, v, wa) in a {
        for &(u2, v2, wb) in b {
            total += wa * wb * space.distance_unchecked(net.omega(u, u2), net.omega(v, v2)).powf(p);
        }
    }
    total
}

/// Checks `2^p GW(X_s, X_t)^p ≤ (t-s)·I` along the mixture path, where `I`
/// sums the time-independent cross integrals of `Δ^X`, `π` and `Δ^Y`.
///
/// The cross terms are taken in both orders, which equals twice either one
/// for the constant fill used here.
pub fn mixture_holder_check(
    x: &ZNetwork,
    y: &ZNetwork,
    z_fill: &MetricPoint,
    pi: &Coupling,
    p: Exponent,
    s: f64,
    t: f64,
) -> Result<HolderCheck> {
    let q = finite_p(p)?;
    let (s, t) = (s.min(t), s.max(t));
    let path = mixture_path(x, y, z_fill, 0.0)?;
    let coupling = mixture_coupling(x, y, pi, s, t)?;
    let xs = mixture_path(x, y, z_fill, s)?;
    let xt = mixture_path(x, y, z_fill, t)?;
    let gw_upper = distortion(&xs, &xt, &coupling, p)? / 2.0;

    let n = x.len();
    let diag_x: Vec<_> = x.weights().iter().enumerate().map(|(i, &w)| (i, i, w)).collect();
    let diag_y: Vec<_> = y.weights().iter().enumerate().map(|(j, &w)| (n + j, n + j, w)).collect();
    let plan: Vec<_> = pi.support(0.0).into_iter().map(|(i, j, w)| (i, n + j, w)).collect();
    let integral = cross_integral(&path, &plan, &plan, q)
        + cross_integral(&path, &diag_x, &plan, q)
        + cross_integral(&path, &plan, &diag_x, q)
        + cross_integral(&path, &plan, &diag_y, q)
        + cross_integral(&path, &diag_y, &plan, q);
    let bound = ((t - s) * integral).powf(1.0 / q) / 2.0;
    Ok(HolderCheck { s, t, gw_upper, bound })
}

/// Checks `GW(X_s, X_t) ≤ (3|t-s|)^{1/p}/2 · size_{p,z}(X)` along the
/// contraction path, using the explicit mixture coupling.
pub fn contraction_holder_check(net: &ZNetwork, z: &MetricPoint, p: Exponent, s: f64, t: f64) -> Result<HolderCheck> {
    let q = finite_p(p)?;
    let (s, t) = (s.min(t), s.max(t));
    let point = ZNetwork::one_point(net.space().clone(), z.clone())?;
    let pi = Coupling::product(net.weights(), &[1.0]);
    let coupling = mixture_coupling(net, &point, &pi, s, t)?;
    let xs = contraction_path(net, z, s)?;
    let xt = contraction_path(net, z, t)?;
    let gw_upper = distortion(&xs, &xt, &coupling, p)? / 2.0;
    let bound = (3.0 * (t - s)).powf(1.0 / q) / 2.0 * net.size(p, z)?;
    Ok(HolderCheck { s, t, gw_upper, bound })
}

/// Which cells of the coupling carry the interpolated network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Carrier {
    /// Cells with mass strictly above the threshold; weights renormalized.
    Support(f64),
    /// Every cell of `X × Y`, zero-mass cells included.
    Full,
}

impl Default for Carrier {
    fn default() -> Self {
        Carrier::Support(0.0)
    }
}

/// Cells `(i, j)` of the carrier with their renormalized masses.
fn carrier_cells(pi: &Coupling, carrier: Carrier) -> Result<Vec<(usize, usize, f64)>> {
    let cells = match carrier {
        Carrier::Support(threshold) => pi.support(threshold),
        Carrier::Full => (0..pi.rows()).flat_map(|i| (0..pi.cols()).map(move |j| (i, j, pi.get(i, j)))).collect(),
    };
    let total: f64 = cells.iter().map(|c| c.2).sum();
    if cells.is_empty() || total <= 0.0 {
        return Err(Error::InvalidCoupling("coupling has no mass above the threshold".into()));
    }
    Ok(cells.into_iter().map(|(i, j, w)| (i, j, w / total)).collect())
}

/// The network on the carrier of `π` whose kernel at `((i, j), (k, l))` is
/// the point at time `t` on the geodesic from `ω_X(i, k)` to `ω_Y(j, l)`.
pub fn geodesic_interpolate(x: &ZNetwork, y: &ZNetwork, pi: &Coupling, t: f64, carrier: Carrier) -> Result<ZNetwork> {
    check_pair(x, y)?;
    let space = x.space();
    if !space.is_geodesic() {
        return Err(Error::NonGeodesicSpace(space.name().into()));
    }
    check_time(t)?;
    check_coupling(x, y, pi)?;
    let cells = carrier_cells(pi, carrier)?;
    let size = cells.len();
    let kernel = Matrix::from_fn(size, size, |a, b| {
        let (i, j, _) = cells[a];
        let (k, l, _) = cells[b];
        space.geodesic_unchecked(x.omega(i, k), y.omega(j, l), t)
    });
    let labels = cells.iter().map(|&(i, j, _)| format!("{}|{}", x.labels()[i], y.labels()[j])).collect();
    let weights = cells.iter().map(|c| c.2).collect();
    ZNetwork::new(space.clone(), labels, weights, kernel)
}

/// Coupling of `X` with an interpolate projecting each carrier cell `(i, j)` to `i`.
pub fn projection_coupling(x: &ZNetwork, pi: &Coupling, interpolate: &ZNetwork, carrier: Carrier) -> Result<Coupling> {
    let cells = carrier_cells(pi, carrier)?;
    if cells.len() != interpolate.len() {
        return Err(Error::ShapeMismatch("interpolate does not match the coupling carrier".into()));
    }
    let matrix = Matrix::from_fn(x.len(), cells.len(), |i, a| if cells[a].0 == i { cells[a].2 } else { 0.0 });
    let row: Vec<f64> = (0..x.len()).map(|i| (0..cells.len()).map(|a| matrix[(i, a)]).sum()).collect();
    Coupling::new(matrix, &row, interpolate.weights())
}

/// One `(s, t)` sample along a geodesic interpolation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicSample {
    pub s: f64,
    pub t: f64,
    /// Distortion of the diagonal coupling between `X_s` and `X_t`.
    pub distortion: f64,
    /// `|s - t| · dis_p(π)`.
    pub expected: f64,
    /// Exact `GW(X_s, X_t)` when one of them is a Dirac network.
    pub gw_exact: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct GeodesicReport {
    pub p: Exponent,
    /// `dis_p(π)` between the endpoints.
    pub coupling_distortion: f64,
    /// Exact `GW(X, Y)` when one endpoint is a Dirac network, which makes `π` optimal.
    pub endpoint_gw: Option<f64>,
    pub samples: Vec<GeodesicSample>,
}

impl GeodesicReport {
    /// Largest relative deviation from `distortion = |s - t| · dis_p(π)`.
    pub fn max_identity_error(&self) -> f64 {
        let scale = self.coupling_distortion.max(1.0);
        self.samples.iter().map(|e| (e.distortion - e.expected).abs() / scale).fold(0.0, f64::max)
    }

    /// `GW(X_s, X_t) ≤ |s - t| GW(X, Y)` on every sample where both sides are exact;
    /// `None` when no sample qualifies.
    pub fn geodesic_inequality(&self, tol: f64) -> Option<bool> {
        let total = self.endpoint_gw?;
        let exact: Vec<_> = self.samples.iter().filter_map(|e| e.gw_exact.map(|g| (e, g))).collect();
        if exact.is_empty() {
            return None;
        }
        Some(exact.iter().all(|(e, g)| *g <= (e.s - e.t).abs() * total + tol))
    }
}

/// Evaluates the geodesic interpolation at every pair of `times`.
pub fn verify_geodesic(
    x: &ZNetwork,
    y: &ZNetwork,
    pi: &Coupling,
    p: Exponent,
    times: &[f64],
    carrier: Carrier,
) -> Result<GeodesicReport> {
    for &t in times {
        check_time(t)?;
    }
    let coupling_distortion = distortion(x, y, pi, p)?;
    let endpoint_gw = if x.dirac_index().is_some() || y.dirac_index().is_some() {
        Some(gw_exact_dirac(x, y, p)?.value)
    } else {
        None
    };
    let nets = times
        .par_iter()
        .map(|&t| geodesic_interpolate(x, y, pi, t, carrier))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..times.len()).flat_map(|a| (0..times.len()).map(move |b| (a, b))).collect();
    let samples = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (xs, xt) = (&nets[a], &nets[b]);
            let diagonal = Coupling::diagonal(xs.weights());
            let gw_exact = if xs.dirac_index().is_some() || xt.dirac_index().is_some() {
                Some(gw_exact_dirac(xs, xt, p)?.value)
            } else {
                None
            };
            Ok(GeodesicSample {
                s: times[a],
                t: times[b],
                distortion: distortion(xs, xt, &diagonal, p)?,
                expected: (times[a] - times[b]).abs() * coupling_distortion,
                gw_exact,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GeodesicReport { p, coupling_distortion, endpoint_gw, samples })
}

/// `½ D_p(ω_0, ω_1)` for two networks on the same points with the same weights,
/// an upper bound on their GW distance via the identity coupling.
pub fn shared_carrier_bound(x0: &ZNetwork, x1: &ZNetwork, p: Exponent) -> Result<f64> {
    check_pair(x0, x1)?;
    if x0.len() != x1.len() || x0.weights().iter().zip(x1.weights()).any(|(a, b)| (a - b).abs() > CARRIER_TOL) {
        return Err(Error::ShapeMismatch("networks do not share a carrier".into()));
    }
    Ok(distortion(x0, x1, &Coupling::diagonal(x0.weights()), p)? / 2.0)
}

/// Uniform `k`-point network over `{0, 1}` with kernel `1` on columns `v < round(t·k)` and `0` elsewhere.
///
/// Discretizes the step path from the constant-`0` to the constant-`1` kernel;
/// consecutive members differ on a `|t - s|` fraction of cells.
pub fn staircase_network(k: usize, t: f64) -> Result<ZNetwork> {
    check_time(t)?;
    if k == 0 {
        return Err(Error::Empty("staircase needs at least one point".into()));
    }
    let cut = (t * k as f64).round() as usize;
    let kernel = Matrix::from_fn(k, k, |_, v| MetricPoint::label(if v < cut { "1" } else { "0" }));
    ZNetwork::uniform(SpaceDescriptor::binary(), kernel)
}

/// `max(|GW(X, M) - ½GW(X, Y)|, |GW(Y, M) - ½GW(X, Y)|)` for tiny networks,
/// evaluated by exhaustive search; zero iff `M` is an exact midpoint.
pub fn midpoint_defect(x: &ZNetwork, y: &ZNetwork, midpoint: &ZNetwork, p: Exponent, resolution: usize) -> Result<f64> {
    let resolution = resolution.max(MIN_ORACLE_RESOLUTION);
    let total = brute_force_gw(x, y, p, resolution)?.value;
    let to_x = brute_force_gw(x, midpoint, p, resolution)?.value;
    let to_y = brute_force_gw(y, midpoint, p, resolution)?.value;
    Ok((to_x - total / 2.0).abs().max((to_y - total / 2.0).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> MetricPoint {
        MetricPoint::Scalar(x)
    }

    fn real(weights: Vec<f64>, rows: Vec<Vec<f64>>) -> ZNetwork {
        let k = Matrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(s).collect()).collect()).unwrap();
        ZNetwork::with_default_labels(SpaceDescriptor::Real, weights, k).unwrap()
    }

    fn sample_pair() -> (ZNetwork, ZNetwork) {
        (
            real(vec![0.2, 0.8], vec![vec![0.0, 3.0], vec![1.0, -1.0]]),
            real(vec![0.5, 0.25, 0.25], vec![vec![2.0, 0.0, 1.0], vec![1.0, 1.0, 0.5], vec![0.0, 4.0, 0.0]]),
        )
    }

    #[test]
    fn mixture_endpoints_are_certified() {
        let (x, y) = sample_pair();
        let x0 = mixture_path(&x, &y, &s(7.0), 0.0).unwrap();
        let x1 = mixture_path(&x, &y, &s(7.0), 1.0).unwrap();
        assert_eq!(x0.len(), 5);
        let c0 = inclusion_coupling(&x, &x0, 0).unwrap();
        let c1 = inclusion_coupling(&y, &x1, 2).unwrap();
        for p in [Exponent::ONE, Exponent::Infinite] {
            assert_eq!(distortion(&x, &x0, &c0, p).unwrap(), 0.0);
            assert_eq!(distortion(&y, &x1, &c1, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn contraction_sizes_and_endpoint() {
        let (x, _) = sample_pair();
        let z = s(0.5);
        for t in [0.0, 0.5, 1.0] {
            assert_eq!(contraction_path(&x, &z, t).unwrap().len(), 3);
        }
        let end = contraction_path(&x, &z, 1.0).unwrap();
        let point = ZNetwork::one_point(SpaceDescriptor::Real, z).unwrap();
        let c = inclusion_coupling(&point, &end, 2).unwrap();
        assert_eq!(distortion(&point, &end, &c, Exponent::TWO).unwrap(), 0.0);
    }

    #[test]
    fn holder_estimates_hold() {
        let (x, y) = sample_pair();
        let pi = Coupling::product(x.weights(), y.weights());
        let grid = [0.0, 0.1, 0.5, 0.9, 1.0];
        for p in [Exponent::ONE, Exponent::TWO, Exponent::Finite(3.5)] {
            for &a in &grid {
                for &b in &grid {
                    assert!(contraction_holder_check(&x, &s(0.5), p, a, b).unwrap().holds(1e-9));
                    assert!(mixture_holder_check(&x, &y, &s(2.0), &pi, p, a, b).unwrap().holds(1e-9));
                }
            }
        }
        assert!(contraction_holder_check(&x, &s(0.5), Exponent::Infinite, 0.0, 1.0).is_err());
    }

    #[test]
    fn linear_midpoint() {
        let a = ZNetwork::one_point(SpaceDescriptor::Real, s(0.0)).unwrap();
        let b = ZNetwork::one_point(SpaceDescriptor::Real, s(4.0)).unwrap();
        let pi = Coupling::product(&[1.0], &[1.0]);
        let mid = geodesic_interpolate(&a, &b, &pi, 0.5, Carrier::default()).unwrap();
        assert_eq!(mid.omega(0, 0), &s(2.0));
    }

    #[test]
    fn geodesic_identity_and_projection() {
        let (x, y) = sample_pair();
        let pi = Coupling::new(
            Matrix::from_rows(vec![vec![0.2, 0.0, 0.0], vec![0.3, 0.25, 0.25]]).unwrap(),
            x.weights(),
            y.weights(),
        )
        .unwrap();
        let times = [0.0, 0.25, 0.5, 0.75, 1.0];
        for p in [Exponent::ONE, Exponent::TWO, Exponent::Infinite] {
            let report = verify_geodesic(&x, &y, &pi, p, &times, Carrier::default()).unwrap();
            assert!(report.max_identity_error() < 1e-9);
            assert_eq!(report.geodesic_inequality(1e-9), None);
        }
        let start = geodesic_interpolate(&x, &y, &pi, 0.0, Carrier::default()).unwrap();
        assert_eq!(start.len(), 4);
        let proj = projection_coupling(&x, &pi, &start, Carrier::default()).unwrap();
        assert_eq!(distortion(&x, &start, &proj, Exponent::TWO).unwrap(), 0.0);
    }

    #[test]
    fn geodesic_needs_geodesic_space() {
        let x = ZNetwork::one_point(SpaceDescriptor::binary(), MetricPoint::label("0")).unwrap();
        let pi = Coupling::product(&[1.0], &[1.0]);
        assert!(matches!(
            geodesic_interpolate(&x, &x, &pi, 0.5, Carrier::default()),
            Err(Error::NonGeodesicSpace(_))
        ));
    }

    #[test]
    fn staircase_steps() {
        let a = staircase_network(100, 0.25).unwrap();
        let b = staircase_network(100, 0.75).unwrap();
        assert!((shared_carrier_bound(&a, &b, Exponent::ONE).unwrap() - 0.25).abs() < 1e-12);
        let zero = staircase_network(4, 0.0).unwrap();
        assert!(zero.kernel().data().iter().all(|z| z == &MetricPoint::label("0")));
    }

    #[test]
    fn binary_midpoint_defect() {
        let x = ZNetwork::one_point(SpaceDescriptor::binary(), MetricPoint::label("0")).unwrap();
        let y = ZNetwork::one_point(SpaceDescriptor::binary(), MetricPoint::label("1")).unwrap();
        let m = ZNetwork::uniform(
            SpaceDescriptor::binary(),
            Matrix::from_rows(vec![
                vec![MetricPoint::label("0"), MetricPoint::label("1")],
                vec![MetricPoint::label("1"), MetricPoint::label("0")],
            ])
            .unwrap(),
        )
        .unwrap();
        let d2 = midpoint_defect(&x, &y, &m, Exponent::TWO, 10).unwrap();
        assert!((d2 - (0.5f64.sqrt() / 2.0 - 0.25)).abs() < 1e-12);
        assert!(midpoint_defect(&x, &y, &m, Exponent::ONE, 10).unwrap() < 1e-12);
    }
}
