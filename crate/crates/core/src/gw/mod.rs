//! The distortion functional and its minimization over couplings.

mod oracle;
mod solver;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::metric::MetricPoint;
use crate::network::ZNetwork;
use crate::ot::{Coupling, MARGINAL_TOL};

pub use oracle::{brute_force_gw, OracleResult, MAX_ORACLE_DIMENSION, MIN_ORACLE_RESOLUTION};
pub use solver::{gw_exact_dirac, solve_gw, InitStrategy, RestartTrace, SolveConfig, SolveFlags, SolveReport};

/// Default support threshold for `p = ∞` distortion.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;
/// Networks with `n·m` up to this size get a precomputed distortion table.
pub const DENSE_TABLE_LIMIT: usize = 4096;

pub(crate) fn check_pair(x: &ZNetwork, y: &ZNetwork) -> Result<()> {
    if x.space() != y.space() {
        return Err(Error::IncompatibleSpaces);
    }
    Ok(())
}

pub(crate) fn check_coupling(x: &ZNetwork, y: &ZNetwork, pi: &Coupling) -> Result<()> {
    if pi.rows() != x.len() || pi.cols() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "coupling is {}x{}, networks have {} and {} points",
            pi.rows(),
            pi.cols(),
            x.len(),
            y.len()
        )));
    }
    let residual = Coupling::new(pi.matrix().clone(), x.weights(), y.weights())
        .map(|c| c.marginal_residual())
        .unwrap_or(f64::INFINITY);
    if residual > MARGINAL_TOL {
        return Err(Error::InvalidCoupling("coupling marginals do not match network weights".into()));
    }
    Ok(())
}

/// `dis_p(π)` with the default `p = ∞` support threshold.
pub fn distortion(x: &ZNetwork, y: &ZNetwork, pi: &Coupling, p: Exponent) -> Result<f64> {
    distortion_with_threshold(x, y, pi, p, SUPPORT_THRESHOLD)
}

/// `dis_p(π) = ‖d_Z(ω_X, ω_Y)‖_{L^p(π⊗π)}`.
///
/// For `p = ∞` the maximum runs over pairs of cells with mass above `threshold`.
pub fn distortion_with_threshold(x: &ZNetwork, y: &ZNetwork, pi: &Coupling, p: Exponent, threshold: f64) -> Result<f64> {
    check_pair(x, y)?;
    check_coupling(x, y, pi)?;
    let cut = if p.is_infinite() { threshold } else { 0.0 };
    Ok(support_distortion(x, y, &pi.support(cut), p))
}

/// Distortion over explicit support cells `(i, j, mass)`; no validation.
pub(crate) fn support_distortion(x: &ZNetwork, y: &ZNetwork, support: &[(usize, usize, f64)], p: Exponent) -> f64 {
    let space = x.space();
    let dist = |a: &(usize, usize, f64), b: &(usize, usize, f64)| space.distance_unchecked(x.omega(a.0, b.0), y.omega(a.1, b.1));
    match p {
        Exponent::Infinite => {
            let mut worst: f64 = 0.0;
            for a in support {
                for b in support {
                    worst = worst.max(dist(a, b));
                }
            }
            worst
        }
        Exponent::Finite(p) => {
            let mut top: f64 = 0.0;
            for a in support {
                for b in support {
                    top = top.max(dist(a, b));
                }
            }
            if top == 0.0 {
                return 0.0;
            }
            let mut s = 0.0;
            for a in support {
                for b in support {
                    s += a.2 * b.2 * (dist(a, b) / top).powf(p);
                }
            }
            top * s.max(0.0).powf(1.0 / p)
        }
    }
}

/// Most distinct kernel values per network for the quantized table.
pub const QUANTIZED_VALUE_LIMIT: usize = 256;

enum Storage {
    /// Entry `a * nm + b`.
    Dense(Vec<f64>),
    /// Kernel entries replaced by indices into lists of distinct values.
    Quantized { x_index: Vec<u32>, y_index: Vec<u32>, y_values: usize, table: Vec<f64> },
    OnTheFly,
}

/// Distinct values of a kernel and the index of each entry among them, or
/// `None` when there are more than `QUANTIZED_VALUE_LIMIT`.
fn quantize(net: &ZNetwork) -> Option<(Vec<MetricPoint>, Vec<u32>)> {
    let mut values: Vec<MetricPoint> = Vec::new();
    let mut index = Vec::with_capacity(net.len() * net.len());
    for z in net.kernel().data() {
        let k = match values.iter().position(|v| v == z) {
            Some(k) => k,
            None if values.len() < QUANTIZED_VALUE_LIMIT => {
                values.push(z.clone());
                values.len() - 1
            }
            None => return None,
        };
        index.push(k as u32);
    }
    Some((values, index))
}

/// Normalized values `(d_Z(ω_X(i,k), ω_Y(j,l)) / scale)^p` indexed by cells
/// `a = (i, j)`, `b = (k, l)` in row-major order.
pub(crate) struct DistortionTensor<'a> {
    x: &'a ZNetwork,
    y: &'a ZNetwork,
    p: f64,
    /// Largest kernel discrepancy; all entries are divided by it.
    pub scale: f64,
    storage: Storage,
}

impl<'a> DistortionTensor<'a> {
    pub fn new(x: &'a ZNetwork, y: &'a ZNetwork, p: f64) -> Self {
        let (n, m) = (x.len(), y.len());
        let space = x.space();
        let nm = n * m;
        let normalize = |raw: &mut [f64], scale: f64| {
            if scale > 0.0 {
                for v in raw {
                    *v = (*v / scale).powf(p);
                }
            }
        };
        let mut scale: f64 = 0.0;
        let storage = if nm <= DENSE_TABLE_LIMIT {
            let mut raw = vec![0.0; nm * nm];
            for i in 0..n {
                for j in 0..m {
                    let a = i * m + j;
                    for k in 0..n {
                        for l in 0..m {
                            let d = space.distance_unchecked(x.omega(i, k), y.omega(j, l));
                            scale = scale.max(d);
                            raw[a * nm + k * m + l] = d;
                        }
                    }
                }
            }
            normalize(&mut raw, scale);
            Storage::Dense(raw)
        } else if let (Some((xv, x_index)), Some((yv, y_index))) = (quantize(x), quantize(y)) {
            let mut table: Vec<f64> = xv.iter().flat_map(|u| yv.iter().map(|v| space.distance_unchecked(u, v))).collect();
            scale = table.iter().copied().fold(0.0, f64::max);
            normalize(&mut table, scale);
            Storage::Quantized { x_index, y_index, y_values: yv.len(), table }
        } else {
            for i in 0..n {
                for k in 0..n {
                    for j in 0..m {
                        for l in 0..m {
                            scale = scale.max(space.distance_unchecked(x.omega(i, k), y.omega(j, l)));
                        }
                    }
                }
            }
            Storage::OnTheFly
        };
        DistortionTensor { x, y, p, scale, storage }
    }

    pub fn cells(&self) -> usize {
        self.x.len() * self.y.len()
    }

    #[inline]
    pub fn entry(&self, a: usize, b: usize) -> f64 {
        let (n, m) = (self.x.len(), self.y.len());
        match &self.storage {
            Storage::Dense(t) => t[a * self.cells() + b],
            Storage::Quantized { x_index, y_index, y_values, table } => {
                let (i, j, k, l) = (a / m, a % m, b / m, b % m);
                table[x_index[i * n + k] as usize * y_values + y_index[j * m + l] as usize]
            }
            Storage::OnTheFly => {
                if self.scale == 0.0 {
                    return 0.0;
                }
                let d = self.x.space().distance_unchecked(self.x.omega(a / m, b / m), self.y.omega(a % m, b % m));
                (d / self.scale).powf(self.p)
            }
        }
    }

    /// `g_a = Σ_b (L_ab + L_ba) π_b` over the listed support cells `(b, π_b)`.
    pub fn gradient(&self, support: &[(usize, f64)]) -> Vec<f64> {
        if let Storage::Quantized { x_index, y_index, y_values, table } = &self.storage {
            let x_values = table.len() / y_values;
            if x_values * self.y.len() < support.len() {
                return self.quantized_gradient(support, x_index, y_index, *y_values, table);
            }
        }
        let nm = self.cells();
        let mut g = vec![0.0; nm];
        for (a, ga) in g.iter_mut().enumerate() {
            let mut s = 0.0;
            for &(b, w) in support {
                s += (self.entry(a, b) + self.entry(b, a)) * w;
            }
            *ga = s;
        }
        g
    }

    /// The gradient grouped by distinct `X`-kernel values: for each row `i`,
    /// the mass of `π` is first summed over the `k` sharing a value `ω_X(i, k)`.
    fn quantized_gradient(&self, support: &[(usize, f64)], x_index: &[u32], y_index: &[u32], y_values: usize, table: &[f64]) -> Vec<f64> {
        let (n, m) = (self.x.len(), self.y.len());
        let x_values = table.len() / y_values;
        let mut g = vec![0.0; n * m];
        let mut out = vec![0.0; x_values * m];
        let mut into = vec![0.0; x_values * m];
        for i in 0..n {
            out.iter_mut().chain(into.iter_mut()).for_each(|v| *v = 0.0);
            for &(b, w) in support {
                let (k, l) = (b / m, b % m);
                out[x_index[i * n + k] as usize * m + l] += w;
                into[x_index[k * n + i] as usize * m + l] += w;
            }
            for j in 0..m {
                let mut s = 0.0;
                for u in 0..x_values {
                    let row = &table[u * y_values..(u + 1) * y_values];
                    for l in 0..m {
                        s += row[y_index[j * m + l] as usize] * out[u * m + l] + row[y_index[l * m + j] as usize] * into[u * m + l];
                    }
                }
                g[i * m + j] = s;
            }
        }
        g
    }

    /// Converts a normalized objective `Σ π_a π_b L_ab` into a distortion.
    pub fn to_distortion(&self, objective: f64) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.scale * objective.max(0.0).powf(1.0 / self.p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::metric::{MetricPoint, SpaceDescriptor};

    fn real(rows: Vec<Vec<f64>>) -> ZNetwork {
        let k = Matrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(MetricPoint::Scalar).collect()).collect()).unwrap();
        ZNetwork::uniform(SpaceDescriptor::Real, k).unwrap()
    }

    #[test]
    fn identical_networks_diagonal() {
        let x = real(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 5.0], vec![3.0, 1.0, 0.0]]);
        let pi = Coupling::diagonal(x.weights());
        for p in [Exponent::ONE, Exponent::TWO, Exponent::Infinite] {
            assert_eq!(distortion(&x, &x, &pi, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn one_point_networks() {
        let a = real(vec![vec![1.5]]);
        let b = real(vec![vec![-2.0]]);
        let pi = Coupling::product(&[1.0], &[1.0]);
        assert_eq!(distortion(&a, &b, &pi, Exponent::Finite(3.0)).unwrap(), 3.5);
    }

    #[test]
    fn discrete_dirac_pair() {
        let space = SpaceDescriptor::binary();
        let x = ZNetwork::one_point(space.clone(), MetricPoint::label("0")).unwrap();
        let y = ZNetwork::one_point(space, MetricPoint::label("1")).unwrap();
        let pi = Coupling::product(&[1.0], &[1.0]);
        assert_eq!(distortion(&x, &y, &pi, Exponent::ONE).unwrap(), 1.0);
    }

    #[test]
    fn rejects_mismatches() {
        let x = real(vec![vec![0.0]]);
        let y = ZNetwork::one_point(SpaceDescriptor::LambdaInf, MetricPoint::Scalar(0.0)).unwrap();
        let pi = Coupling::product(&[1.0], &[1.0]);
        assert_eq!(distortion(&x, &y, &pi, Exponent::ONE), Err(Error::IncompatibleSpaces));
        let z = real(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let wrong = Coupling::product(&[1.0], &[0.3, 0.7]);
        assert!(distortion(&x, &z, &wrong, Exponent::ONE).is_err());
    }

    #[test]
    fn tensor_matches_direct_evaluation() {
        let x = real(vec![vec![0.0, 1.0], vec![2.0, 0.5]]);
        let y = real(vec![vec![1.0, 3.0, 0.0], vec![0.0, 0.0, 1.0], vec![2.0, 2.0, 2.0]]);
        let pi = Coupling::product(x.weights(), y.weights());
        let t = DistortionTensor::new(&x, &y, 2.0);
        let support: Vec<(usize, f64)> = pi.matrix().data().iter().copied().enumerate().collect();
        let g = t.gradient(&support);
        let objective: f64 = support.iter().map(|&(a, w)| w * g[a]).sum::<f64>() / 2.0;
        let direct = distortion(&x, &y, &pi, Exponent::TWO).unwrap();
        assert!((t.to_distortion(objective) - direct).abs() < 1e-12);
    }

    #[test]
    fn quantized_gradient_matches_entrywise_sum() {
        // 70 x 60 cells exceed the dense limit; the kernels take three values.
        let value = |i: usize, k: usize| MetricPoint::Scalar(((i * 7 + k * 3) % 3) as f64);
        let x = ZNetwork::uniform(SpaceDescriptor::Real, Matrix::from_fn(70, 70, value)).unwrap();
        let y = ZNetwork::uniform(SpaceDescriptor::Real, Matrix::from_fn(60, 60, |j, l| value(l, j + 1))).unwrap();
        let t = DistortionTensor::new(&x, &y, 1.5);
        assert!(matches!(t.storage, Storage::Quantized { .. }));
        let support: Vec<(usize, f64)> = (0..70 * 60).map(|a| (a, ((a % 11) as f64 + 1.0) * 1e-4)).collect();
        let g = t.gradient(&support);
        for a in [0, 17, 999, 4199] {
            let direct: f64 = support.iter().map(|&(b, w)| (t.entry(a, b) + t.entry(b, a)) * w).sum();
            assert!((g[a] - direct).abs() < 1e-9 * direct.max(1.0), "{} vs {direct}", g[a]);
        }
    }
}
