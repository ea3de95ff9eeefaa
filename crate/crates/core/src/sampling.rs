//! Seeded random spaces, points and networks for property checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::exponent::Exponent;
use crate::matrix::Matrix;
use crate::metric::{Empirical, MetricPoint, ProductFactor, SpaceDescriptor};
use crate::network::ZNetwork;
use crate::ot::Coupling;

/// One representative descriptor for each kind of target space.
pub fn standard_spaces() -> Vec<SpaceDescriptor> {
    vec![
        SpaceDescriptor::Real,
        SpaceDescriptor::LambdaInf,
        SpaceDescriptor::LambdaQ { q: 2.0 },
        SpaceDescriptor::EuclideanLr { n: 3, r: Exponent::TWO },
        SpaceDescriptor::WeightedProduct {
            factors: vec![
                ProductFactor { space: SpaceDescriptor::Real, weight: 1.0 },
                ProductFactor { space: SpaceDescriptor::LambdaInf, weight: 0.5 },
            ],
            q: 2.0,
        },
        SpaceDescriptor::Cone { base: Box::new(SpaceDescriptor::EuclideanLr { n: 2, r: Exponent::TWO }) },
        SpaceDescriptor::Orthogonal { d: 3 },
        SpaceDescriptor::Empirical1D { p: 2.0 },
        SpaceDescriptor::SlackInterleaving { lambda: 0.5, grid: vec![0.0, 0.5, 1.0, 1.5, 2.0] },
        SpaceDescriptor::DampedSup { grid: vec![0.5, 1.0, 2.0, 4.0] },
        SpaceDescriptor::Discrete { alphabet: vec!["a".into(), "b".into(), "c".into()] },
    ]
}

/// Geodesic target spaces, for interpolation checks.
pub fn geodesic_spaces() -> Vec<SpaceDescriptor> {
    vec![
        SpaceDescriptor::Real,
        SpaceDescriptor::EuclideanLr { n: 2, r: Exponent::ONE },
        SpaceDescriptor::EuclideanLr { n: 3, r: Exponent::Infinite },
        SpaceDescriptor::WeightedProduct {
            factors: vec![
                ProductFactor { space: SpaceDescriptor::Real, weight: 2.0 },
                ProductFactor { space: SpaceDescriptor::EuclideanLr { n: 2, r: Exponent::TWO }, weight: 1.0 },
            ],
            q: 3.0,
        },
    ]
}

/// A coarse value so that repeated values (and zero distances) occur.
fn coarse<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if rng.gen_bool(0.2) {
        lo + (hi - lo) * f64::from(rng.gen_range(0..4)) / 3.0
    } else {
        rng.gen_range(lo..hi)
    }
}

fn random_orthogonal<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    // Gram-Schmidt on random columns, then an optional reflection.
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for c in &cols {
                let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= dot * b);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-3 {
            cols.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    if rng.gen_bool(0.5) {
        cols[0].iter_mut().for_each(|a| *a = -*a);
    }
    (0..d * d).map(|k| cols[k % d][k / d]).collect()
}

/// A random point of `space`.
pub fn random_point<R: Rng>(space: &SpaceDescriptor, rng: &mut R) -> MetricPoint {
    match space {
        SpaceDescriptor::Real => MetricPoint::Scalar(coarse(rng, -2.0, 2.0)),
        SpaceDescriptor::LambdaInf | SpaceDescriptor::LambdaQ { .. } => MetricPoint::Scalar(coarse(rng, 0.0, 3.0)),
        SpaceDescriptor::EuclideanLr { n, .. } => MetricPoint::Vector((0..*n).map(|_| coarse(rng, -1.0, 1.0)).collect()),
        SpaceDescriptor::WeightedProduct { factors, .. } => {
            MetricPoint::Tuple(factors.iter().map(|f| random_point(&f.space, rng)).collect())
        }
        SpaceDescriptor::Cone { base } => {
            let radius = if rng.gen_bool(0.1) { 0.0 } else { coarse(rng, 0.0, 2.0) };
            MetricPoint::cone(random_point(base, rng), radius)
        }
        SpaceDescriptor::Orthogonal { d } => MetricPoint::Matrix { dim: *d, entries: random_orthogonal(rng, *d) },
        SpaceDescriptor::Empirical1D { .. } => {
            let k = rng.gen_range(1..=4);
            let support = (0..k).map(|_| coarse(rng, -1.0, 1.0)).collect();
            MetricPoint::Empirical(Empirical::new(support, random_weights(k, rng)).expect("valid random measure"))
        }
        SpaceDescriptor::SlackInterleaving { grid, .. } => {
            MetricPoint::Sampled(grid.iter().map(|_| coarse(rng, 0.0, 2.0)).collect())
        }
        SpaceDescriptor::DampedSup { grid } => MetricPoint::Sampled(grid.iter().map(|_| coarse(rng, -2.0, 2.0)).collect()),
        SpaceDescriptor::Discrete { alphabet } => {
            MetricPoint::Label(alphabet.choose(rng).expect("nonempty alphabet").clone())
        }
    }
}

/// A random probability vector of length `n`, every entry positive.
pub fn random_weights<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let head: f64 = w[..n - 1].iter().sum();
    w[n - 1] = 1.0 - head;
    w
}

/// A random network with `n` points, positive weights and an arbitrary (asymmetric) kernel.
pub fn random_network<R: Rng>(space: &SpaceDescriptor, n: usize, rng: &mut R) -> ZNetwork {
    let kernel = Matrix::from_fn(n, n, |_, _| random_point(space, rng));
    let weights = random_weights(n, rng);
    ZNetwork::with_default_labels(space.clone(), weights, kernel).expect("random networks are valid")
}

/// A random network with `n` points whose measure is a Dirac mass at a random point.
pub fn random_dirac_network<R: Rng>(space: &SpaceDescriptor, n: usize, rng: &mut R) -> ZNetwork {
    let kernel = Matrix::from_fn(n, n, |_, _| random_point(space, rng));
    let mut weights = vec![0.0; n];
    weights[rng.gen_range(0..n)] = 1.0;
    ZNetwork::with_default_labels(space.clone(), weights, kernel).expect("random networks are valid")
}

/// Northwest-corner vertex of the transportation polytope under random row and column orders.
fn random_vertex<R: Rng>(mu: &[f64], nu: &[f64], rng: &mut R) -> Matrix {
    let mut rows: Vec<usize> = (0..mu.len()).collect();
    let mut cols: Vec<usize> = (0..nu.len()).collect();
    rows.shuffle(rng);
    cols.shuffle(rng);
    let (mut r, mut c) = (mu.to_vec(), nu.to_vec());
    let mut plan = Matrix::filled(mu.len(), nu.len(), 0.0);
    let (mut a, mut b) = (0, 0);
    while a < rows.len() && b < cols.len() {
        let (i, j) = (rows[a], cols[b]);
        let mass = r[i].min(c[j]);
        plan[(i, j)] += mass;
        r[i] -= mass;
        c[j] -= mass;
        if r[i] <= c[j] {
            a += 1;
        } else {
            b += 1;
        }
    }
    plan
}

/// A random coupling: a random convex combination of a few random polytope vertices.
pub fn random_coupling<R: Rng>(mu: &[f64], nu: &[f64], rng: &mut R) -> Coupling {
    let k = rng.gen_range(1..=3);
    let mix = random_weights(k, rng);
    let mut plan = Matrix::filled(mu.len(), nu.len(), 0.0);
    for lambda in mix {
        let v = random_vertex(mu, nu, rng);
        for i in 0..mu.len() {
            for j in 0..nu.len() {
                plan[(i, j)] += lambda * v[(i, j)];
            }
        }
    }
    Coupling::new(plan, mu, nu).expect("vertex mixtures are couplings")
}
