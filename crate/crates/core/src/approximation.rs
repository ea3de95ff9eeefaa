//! Distance-to-landmark embeddings into `R^n` and the two-sided error bound
//! they give on the GW distance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::bound_report;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::gw::{check_pair, solve_gw, SolveConfig};
use crate::matrix::Matrix;
use crate::metric::{directed_hausdorff, MetricPoint, SpaceDescriptor};
use crate::network::ZNetwork;

/// An ordered, nonempty list of points in a target space.
#[derive(Clone, Debug, PartialEq)]
pub struct LandmarkSet {
    space: SpaceDescriptor,
    points: Vec<MetricPoint>,
}

impl LandmarkSet {
    pub fn new(space: SpaceDescriptor, points: Vec<MetricPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("landmark set is empty".into()));
        }
        for q in &points {
            space.check(q)?;
        }
        Ok(LandmarkSet { space, points })
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn points(&self) -> &[MetricPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `max_{z ∈ values} min_q d_Z(z, q)`.
    pub fn one_sided_hausdorff(&self, values: &[MetricPoint]) -> Result<f64> {
        for z in values {
            self.space.check(z)?;
        }
        Ok(directed_hausdorff(&self.space, values, &self.points))
    }
}

/// Replaces each kernel value `z` by `(d_Z(z, q_1), …, d_Z(z, q_n))` in `R^n` with the ℓ^r distance.
pub fn embed_rn(net: &ZNetwork, landmarks: &LandmarkSet, r: Exponent) -> Result<ZNetwork> {
    if net.space() != landmarks.space() {
        return Err(Error::IncompatibleSpaces);
    }
    let space = net.space();
    let n = net.len();
    let kernel = Matrix::from_fn(n, n, |i, k| {
        let z = net.omega(i, k);
        MetricPoint::Vector(landmarks.points().iter().map(|q| space.distance_unchecked(z, q)).collect())
    });
    let target = SpaceDescriptor::EuclideanLr { n: landmarks.len(), r };
    ZNetwork::new(target, net.labels().to_vec(), net.weights().to_vec(), kernel)
}

/// All kernel entries of the networks, in row-major order, duplicates kept.
pub fn kernel_values(nets: &[&ZNetwork]) -> Vec<MetricPoint> {
    nets.iter().flat_map(|net| net.kernel().data().iter().cloned()).collect()
}

/// Greedy farthest-point selection of `k` landmarks from `values`, starting at a seeded random index.
pub fn landmark_fps(space: &SpaceDescriptor, values: &[MetricPoint], k: usize, seed: u64) -> Result<LandmarkSet> {
    if values.is_empty() {
        return Err(Error::Empty("no candidate landmarks".into()));
    }
    let start = ChaCha8Rng::seed_from_u64(seed).gen_range(0..values.len());
    landmark_fps_from(space, values, k, start)
}

/// Farthest-point selection starting at `values[start]`; ties go to the lowest index.
pub fn landmark_fps_from(space: &SpaceDescriptor, values: &[MetricPoint], k: usize, start: usize) -> Result<LandmarkSet> {
    if values.is_empty() {
        return Err(Error::Empty("no candidate landmarks".into()));
    }
    if k == 0 || k > values.len() {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k <= {} landmarks, got {k}",
            values.len()
        )));
    }
    if start >= values.len() {
        return Err(Error::InvalidParameter(format!("start index {start} out of range")));
    }
    for z in values {
        space.check(z)?;
    }
    let mut chosen = vec![start];
    let mut nearest: Vec<f64> = values.iter().map(|z| space.distance_unchecked(z, &values[start])).collect();
    while chosen.len() < k {
        let mut next = 0;
        for (i, d) in nearest.iter().enumerate() {
            if *d > nearest[next] {
                next = i;
            }
        }
        chosen.push(next);
        for (d, z) in nearest.iter_mut().zip(values) {
            *d = d.min(space.distance_unchecked(z, &values[next]));
        }
    }
    LandmarkSet::new(space.clone(), chosen.into_iter().map(|i| values[i].clone()).collect())
}

#[derive(Clone, Debug)]
pub struct SandwichReport {
    pub p: Exponent,
    pub r: Exponent,
    /// Number of landmarks.
    pub n: usize,
    /// Solver value for the embedded pair, an upper bound on their GW distance.
    pub rn_value: f64,
    /// Whether `rn_value` is the exact GW distance of the embedded pair.
    pub rn_exact: bool,
    /// A certified lower bound on the GW distance of the embedded pair.
    pub rn_lower_certificate: f64,
    /// `n^{-1/r} · rn_lower_certificate`, a lower bound on `GW^Z`.
    pub lower: f64,
    /// `rn_value + hausdorff_term`, an upper bound on `GW^Z`.
    pub upper: f64,
    /// Empirical Hausdorff term: largest distance from a kernel value of
    /// either network to its nearest landmark.
    pub hausdorff_term: f64,
}

/// Two-sided bound on `GW_p^Z(x, y)` from the landmark embedding.
///
/// The lower side uses the exact embedded distance when the solver certifies
/// it and the largest lower bound of the hierarchy otherwise, so that both
/// sides hold regardless of solver quality.
pub fn sandwich(
    x: &ZNetwork,
    y: &ZNetwork,
    landmarks: &LandmarkSet,
    p: Exponent,
    r: Exponent,
    config: &SolveConfig,
) -> Result<SandwichReport> {
    check_pair(x, y)?;
    let (xq, yq) = rayon::join(|| embed_rn(x, landmarks, r), || embed_rn(y, landmarks, r));
    let (xq, yq) = (xq?, yq?);
    let rn = solve_gw(&xq, &yq, &SolveConfig { p, ..config.clone() })?;
    let rn_lower_certificate = if rn.flags.exact { rn.value } else { bound_report(&xq, &yq, p, None)?.best() };
    let n = landmarks.len();
    let hausdorff_term = landmarks.one_sided_hausdorff(&kernel_values(&[x, y]))?;
    Ok(SandwichReport {
        p,
        r,
        n,
        rn_value: rn.value,
        rn_exact: rn.flags.exact,
        rn_lower_certificate,
        lower: r.inv_root(n) * rn_lower_certificate,
        upper: rn.value + hausdorff_term,
        hausdorff_term,
    })
}
