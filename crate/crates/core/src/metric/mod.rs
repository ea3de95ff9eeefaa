//! Target metric spaces `(Z, d_Z)` for network kernels.
//!
//! A [`SpaceDescriptor`] is a closed, serializable description of a target
//! space together with its parameters. Kernel values are [`MetricPoint`]s;
//! every point is checked against its descriptor before any distance is
//! evaluated, so the hot-loop entry point [`SpaceDescriptor::distance_unchecked`]
//! can assume well-formed input.

mod functions;
mod json;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::ot;

pub use functions::{damped_sup_distance, slack_interleaving_distance};

/// Tolerance for probability weights summing to one.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Tolerance for `MᵀM = I` on orthogonal matrices.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;

/// One factor of a weighted product space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductFactor {
    pub space: SpaceDescriptor,
    pub weight: f64,
}

/// Description of a target metric space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SpaceDescriptor {
    /// The real line with `|a - b|`.
    Real,
    /// `R≥0` with the ultrametric `max(a, b)` on disagreement.
    LambdaInf,
    /// `R≥0` with `|a^q - b^q|^{1/q}`.
    LambdaQ { q: f64 },
    /// `R^n` with the ℓ^r distance.
    EuclideanLr { n: usize, r: Exponent },
    /// Product of factor spaces with the weighted ℓ^q combination of factor distances.
    WeightedProduct { factors: Vec<ProductFactor>, q: f64 },
    /// Euclidean cone over a base space; radius-zero points are identified.
    Cone { base: Box<SpaceDescriptor> },
    /// The orthogonal group `O(d)` with Frobenius distance.
    Orthogonal { d: usize },
    /// Finitely supported probability measures on `R` with `W_p`.
    Empirical1D { p: f64 },
    /// Nonnegative functions sampled on a grid, λ-slack interleaving distance.
    SlackInterleaving { lambda: f64, grid: Vec<f64> },
    /// Functions sampled on a positive grid, `max_k e^{-2/t_k} |f1 - f2|`.
    DampedSup { grid: Vec<f64> },
    /// Finite label alphabet with the discrete metric.
    Discrete { alphabet: Vec<String> },
}

/// A finitely supported probability measure on the real line.
///
/// Support is kept sorted and free of duplicates; zero-mass atoms are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct Empirical {
    support: Vec<f64>,
    weights: Vec<f64>,
}

impl Empirical {
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::ShapeMismatch(format!(
                "empirical support has {} atoms but {} weights",
                support.len(),
                weights.len()
            )));
        }
        if support.is_empty() {
            return Err(Error::Empty("empirical measure".into()));
        }
        if support.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("empirical support must be finite".into()));
        }
        check_probability(&weights)?;
        let mut atoms: Vec<(f64, f64)> = support
            .into_iter()
            .zip(weights)
            .filter(|&(_, w)| w > 0.0)
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            if support.last() == Some(&x) {
                *weights.last_mut().unwrap() += w;
            } else {
                support.push(x);
                weights.push(w);
            }
        }
        Ok(Empirical { support, weights })
    }

    /// A unit mass at `x`.
    pub fn dirac(x: f64) -> Self {
        Empirical { support: vec![x], weights: vec![1.0] }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// A value in some target space.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricPoint {
    Scalar(f64),
    Vector(Vec<f64>),
    /// Square matrix stored row-major.
    Matrix { dim: usize, entries: Vec<f64> },
    /// Cone class `[base, radius]`.
    Cone { base: Box<MetricPoint>, radius: f64 },
    Tuple(Vec<MetricPoint>),
    Empirical(Empirical),
    /// Samples aligned to the descriptor grid.
    Sampled(Vec<f64>),
    Label(String),
}

impl MetricPoint {
    pub fn cone(base: MetricPoint, radius: f64) -> Self {
        MetricPoint::Cone { base: Box::new(base), radius }
    }

    pub fn label(s: impl Into<String>) -> Self {
        MetricPoint::Label(s.into())
    }

    /// Builds an orthogonal matrix point, rejecting inputs with `‖MᵀM - I‖_max > 1e-9`.
    pub fn orthogonal(dim: usize, entries: Vec<f64>) -> Result<Self> {
        check_orthogonal(dim, &entries)?;
        Ok(MetricPoint::Matrix { dim, entries })
    }
}

pub(crate) fn check_probability(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidWeights("weights must be finite and nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

fn check_orthogonal(dim: usize, m: &[f64]) -> Result<()> {
    if m.len() != dim * dim {
        return Err(Error::ShapeMismatch(format!(
            "expected {dim}x{dim} matrix, got {} entries",
            m.len()
        )));
    }
    for i in 0..dim {
        for j in 0..dim {
            let dot: f64 = (0..dim).map(|k| m[k * dim + i] * m[k * dim + j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            if (dot - target).abs() > ORTHOGONALITY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "matrix is not orthogonal: (MᵀM)[{i},{j}] = {dot}"
                )));
            }
        }
    }
    Ok(())
}

fn check_grid(grid: &[f64], positive: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidDescriptor("sample grid is empty".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidDescriptor("sample grid must be finite".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidDescriptor("sample grid must be strictly increasing".into()));
    }
    if positive && grid[0] <= 0.0 {
        return Err(Error::InvalidDescriptor(format!(
            "damped-sup grid must be positive, found {}",
            grid[0]
        )));
    }
    Ok(())
}

fn shape_err(desc: &SpaceDescriptor, point: &MetricPoint) -> Error {
    Error::ShapeMismatch(format!("point {point:?} does not conform to {}", desc.name()))
}

impl SpaceDescriptor {
    /// Short variant name, as used in JSON.
    pub fn name(&self) -> &'static str {
        match self {
            SpaceDescriptor::Real => "Real",
            SpaceDescriptor::LambdaInf => "LambdaInf",
            SpaceDescriptor::LambdaQ { .. } => "LambdaQ",
            SpaceDescriptor::EuclideanLr { .. } => "EuclideanLr",
            SpaceDescriptor::WeightedProduct { .. } => "WeightedProduct",
            SpaceDescriptor::Cone { .. } => "Cone",
            SpaceDescriptor::Orthogonal { .. } => "Orthogonal",
            SpaceDescriptor::Empirical1D { .. } => "Empirical1D",
            SpaceDescriptor::SlackInterleaving { .. } => "SlackInterleaving",
            SpaceDescriptor::DampedSup { .. } => "DampedSup",
            SpaceDescriptor::Discrete { .. } => "Discrete",
        }
    }

    /// The discrete space `{"0", "1"}`.
    pub fn binary() -> Self {
        SpaceDescriptor::Discrete { alphabet: vec!["0".into(), "1".into()] }
    }

    /// Checks parameter ranges, recursively for composite spaces.
    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceDescriptor::Real | SpaceDescriptor::LambdaInf => Ok(()),
            SpaceDescriptor::LambdaQ { q } => {
                if q.is_finite() && *q >= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidDescriptor(format!("LambdaQ needs q >= 1, got {q}")))
                }
            }
            SpaceDescriptor::EuclideanLr { n, .. } => {
                if *n >= 1 {
                    Ok(())
                } else {
                    Err(Error::InvalidDescriptor("EuclideanLr needs n >= 1".into()))
                }
            }
            SpaceDescriptor::WeightedProduct { factors, q } => {
                if factors.is_empty() {
                    return Err(Error::InvalidDescriptor("product has no factors".into()));
                }
                if !(q.is_finite() && *q >= 1.0) {
                    return Err(Error::InvalidDescriptor(format!(
                        "product mixing exponent must lie in [1, inf), got {q}"
                    )));
                }
                for f in factors {
                    if !(f.weight.is_finite() && f.weight >= 0.0) {
                        return Err(Error::InvalidDescriptor(format!(
                            "product weight must be nonnegative, got {}",
                            f.weight
                        )));
                    }
                    f.space.validate()?;
                }
                Ok(())
            }
            SpaceDescriptor::Cone { base } => base.validate(),
            SpaceDescriptor::Orthogonal { d } => {
                if *d >= 1 {
                    Ok(())
                } else {
                    Err(Error::InvalidDescriptor("Orthogonal needs d >= 1".into()))
                }
            }
            SpaceDescriptor::Empirical1D { p } => {
                if p.is_finite() && *p >= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidDescriptor(format!("Empirical1D needs p in [1, inf), got {p}")))
                }
            }
            SpaceDescriptor::SlackInterleaving { lambda, grid } => {
                if !(lambda.is_finite() && *lambda >= 0.0) {
                    return Err(Error::InvalidDescriptor(format!("slack must be >= 0, got {lambda}")));
                }
                check_grid(grid, false)
            }
            SpaceDescriptor::DampedSup { grid } => check_grid(grid, true),
            SpaceDescriptor::Discrete { alphabet } => {
                if alphabet.is_empty() {
                    return Err(Error::InvalidDescriptor("empty alphabet".into()));
                }
                let mut sorted = alphabet.clone();
                sorted.sort();
                sorted.dedup();
                if sorted.len() != alphabet.len() {
                    return Err(Error::InvalidDescriptor("duplicate labels in alphabet".into()));
                }
                Ok(())
            }
        }
    }

    /// Checks that `point` is a well-formed element of this space.
    pub fn check(&self, point: &MetricPoint) -> Result<()> {
        use MetricPoint as P;
        use SpaceDescriptor as S;
        match (self, point) {
            (S::Real, P::Scalar(x)) if x.is_finite() => Ok(()),
            (S::LambdaInf | S::LambdaQ { .. }, P::Scalar(x)) if x.is_finite() && *x >= 0.0 => Ok(()),
            (S::EuclideanLr { n, .. }, P::Vector(v)) if v.len() == *n && v.iter().all(|x| x.is_finite()) => Ok(()),
            (S::WeightedProduct { factors, .. }, P::Tuple(parts)) if parts.len() == factors.len() => {
                factors.iter().zip(parts).try_for_each(|(f, part)| f.space.check(part))
            }
            (S::Cone { base }, P::Cone { base: b, radius }) if radius.is_finite() && *radius >= 0.0 => base.check(b),
            (S::Orthogonal { d }, P::Matrix { dim, entries }) if dim == d => check_orthogonal(*d, entries),
            (S::Empirical1D { .. }, P::Empirical(_)) => Ok(()),
            (S::SlackInterleaving { grid, .. }, P::Sampled(v)) if v.len() == grid.len() => {
                if v.iter().all(|x| x.is_finite() && *x >= 0.0) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter("slack-interleaving samples must be nonnegative".into()))
                }
            }
            (S::DampedSup { grid }, P::Sampled(v)) if v.len() == grid.len() && v.iter().all(|x| x.is_finite()) => Ok(()),
            (S::Discrete { alphabet }, P::Label(l)) if alphabet.contains(l) => Ok(()),
            _ => Err(shape_err(self, point)),
        }
    }

    /// `d_Z(a, b)` after checking both points.
    pub fn distance(&self, a: &MetricPoint, b: &MetricPoint) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.distance_unchecked(a, b))
    }

    /// `d_Z(a, b)` for points already known to conform.
    ///
    /// Panics if a point does not match the descriptor variant.
    pub fn distance_unchecked(&self, a: &MetricPoint, b: &MetricPoint) -> f64 {
        use MetricPoint as P;
        use SpaceDescriptor as S;
        match (self, a, b) {
            (S::Real, P::Scalar(x), P::Scalar(y)) => (x - y).abs(),
            (S::LambdaInf, P::Scalar(x), P::Scalar(y)) => {
                if x == y {
                    0.0
                } else {
                    x.max(*y)
                }
            }
            (S::LambdaQ { q }, P::Scalar(x), P::Scalar(y)) => {
                if x == y {
                    0.0
                } else {
                    (x.powf(*q) - y.powf(*q)).abs().powf(1.0 / q)
                }
            }
            (S::EuclideanLr { r, .. }, P::Vector(x), P::Vector(y)) => lr_distance(*r, x, y),
            (S::WeightedProduct { factors, q }, P::Tuple(x), P::Tuple(y)) => {
                let s: f64 = factors
                    .iter()
                    .zip(x.iter().zip(y))
                    .filter(|(f, _)| f.weight > 0.0)
                    .map(|(f, (u, v))| f.weight * f.space.distance_unchecked(u, v).powf(*q))
                    .sum();
                s.powf(1.0 / q)
            }
            (S::Cone { base }, _, _) => cone_distance_unchecked(base, a, b),
            (S::Orthogonal { .. }, P::Matrix { entries: x, .. }, P::Matrix { entries: y, .. }) => {
                lr_distance(Exponent::TWO, x, y)
            }
            (S::Empirical1D { p }, P::Empirical(x), P::Empirical(y)) => {
                // A fixed argument order keeps the rounded value exactly symmetric.
                let key = |e: &Empirical| e.support().iter().chain(e.weights()).map(|v| v.to_bits()).collect::<Vec<_>>();
                let (x, y) = if key(x) <= key(y) { (x, y) } else { (y, x) };
                ot::wasserstein_1d_sorted(x.support(), x.weights(), y.support(), y.weights(), *p)
            }
            (S::SlackInterleaving { lambda, grid }, P::Sampled(f), P::Sampled(g)) => {
                slack_interleaving_distance(*lambda, grid, f, g)
            }
            (S::DampedSup { grid }, P::Sampled(f), P::Sampled(g)) => damped_sup_distance(grid, f, g),
            (S::Discrete { .. }, P::Label(x), P::Label(y)) => {
                if x == y {
                    0.0
                } else {
                    1.0
                }
            }
            _ => panic!("points {a:?} / {b:?} do not conform to {}", self.name()),
        }
    }

    /// Whether [`SpaceDescriptor::geodesic_point`] supports this space.
    pub fn is_geodesic(&self) -> bool {
        match self {
            SpaceDescriptor::Real | SpaceDescriptor::EuclideanLr { .. } => true,
            SpaceDescriptor::WeightedProduct { factors, .. } => factors.iter().all(|f| f.space.is_geodesic()),
            _ => false,
        }
    }

    /// A point `γ(t)` on a geodesic from `a` to `b`.
    ///
    /// Linear interpolation is used on `R` and `R^n` (for every ℓ^r, including
    /// the non-uniquely-geodesic `r = 1` and `r = ∞`), factorwise on products.
    pub fn geodesic_point(&self, a: &MetricPoint, b: &MetricPoint, t: f64) -> Result<MetricPoint> {
        if !self.is_geodesic() {
            return Err(Error::NonGeodesicSpace(self.name().into()));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("geodesic time {t} outside [0, 1]")));
        }
        self.check(a)?;
        self.check(b)?;
        Ok(self.geodesic_unchecked(a, b, t))
    }

    pub(crate) fn geodesic_unchecked(&self, a: &MetricPoint, b: &MetricPoint, t: f64) -> MetricPoint {
        if t == 0.0 {
            return a.clone();
        }
        if t == 1.0 {
            return b.clone();
        }
        let lerp = |x: f64, y: f64| (1.0 - t) * x + t * y;
        match (self, a, b) {
            (SpaceDescriptor::Real, MetricPoint::Scalar(x), MetricPoint::Scalar(y)) => MetricPoint::Scalar(lerp(*x, *y)),
            (SpaceDescriptor::EuclideanLr { .. }, MetricPoint::Vector(x), MetricPoint::Vector(y)) => {
                MetricPoint::Vector(x.iter().zip(y).map(|(u, v)| lerp(*u, *v)).collect())
            }
            (SpaceDescriptor::WeightedProduct { factors, .. }, MetricPoint::Tuple(x), MetricPoint::Tuple(y)) => {
                MetricPoint::Tuple(
                    factors
                        .iter()
                        .zip(x.iter().zip(y))
                        .map(|(f, (u, v))| f.space.geodesic_unchecked(u, v, t))
                        .collect(),
                )
            }
            _ => panic!("geodesic requested on non-geodesic or non-conforming input"),
        }
    }
}

fn lr_distance(r: Exponent, x: &[f64], y: &[f64]) -> f64 {
    let diffs = x.iter().zip(y).map(|(u, v)| (u - v).abs());
    match r {
        Exponent::Infinite => diffs.fold(0.0, f64::max),
        Exponent::Finite(1.0) => diffs.sum(),
        Exponent::Finite(2.0) => diffs.map(|d| d * d).sum::<f64>().sqrt(),
        Exponent::Finite(r) => diffs.map(|d| d.powf(r)).sum::<f64>().powf(1.0 / r),
    }
}

/// Cone metric `(r² + s² − 2rs·cos(min(d_Ω(u, v), π)))^{1/2}` between `[u, r]` and `[v, s]`.
pub fn cone_distance(base: &SpaceDescriptor, a: &MetricPoint, b: &MetricPoint) -> Result<f64> {
    let cone = SpaceDescriptor::Cone { base: Box::new(base.clone()) };
    cone.check(a)?;
    cone.check(b)?;
    Ok(cone_distance_unchecked(base, a, b))
}

fn cone_distance_unchecked(base: &SpaceDescriptor, a: &MetricPoint, b: &MetricPoint) -> f64 {
    let (MetricPoint::Cone { base: u, radius: r }, MetricPoint::Cone { base: v, radius: s }) = (a, b) else {
        panic!("cone distance on non-cone points");
    };
    let (r, s) = (*r, *s);
    if r == 0.0 {
        return s;
    }
    if s == 0.0 {
        return r;
    }
    let angle = base.distance_unchecked(u, v).min(std::f64::consts::PI);
    (r * r + s * s - 2.0 * r * s * angle.cos()).max(0.0).sqrt()
}

/// Hausdorff distance between two nonempty finite point sets.
pub fn hausdorff_distance(desc: &SpaceDescriptor, a: &[MetricPoint], b: &[MetricPoint]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("Hausdorff distance needs nonempty sets".into()));
    }
    for p in a.iter().chain(b) {
        desc.check(p)?;
    }
    Ok(directed_hausdorff(desc, a, b).max(directed_hausdorff(desc, b, a)))
}

/// `max_{x ∈ from} min_{y ∈ to} d(x, y)` for conforming points.
pub(crate) fn directed_hausdorff(desc: &SpaceDescriptor, from: &[MetricPoint], to: &[MetricPoint]) -> f64 {
    from.iter()
        .map(|x| {
            to.iter()
                .map(|y| desc.distance_unchecked(x, y))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn s(x: f64) -> MetricPoint {
        MetricPoint::Scalar(x)
    }

    #[test]
    fn lambda_inf_values() {
        let d = SpaceDescriptor::LambdaInf;
        assert_eq!(d.distance(&s(2.0), &s(3.0)).unwrap(), 3.0);
        assert_eq!(d.distance(&s(5.0), &s(5.0)).unwrap(), 0.0);
        assert!(d.distance(&s(-1.0), &s(1.0)).is_err());
    }

    #[test]
    fn lambda_q_value() {
        let d = SpaceDescriptor::LambdaQ { q: 2.0 };
        let v = d.distance(&s(3.0), &s(4.0)).unwrap();
        assert!((v - 7f64.sqrt()).abs() < 1e-12);
        assert!((v - 2.6457513).abs() < 1e-7);
    }

    #[test]
    fn real_identity() {
        let d = SpaceDescriptor::Real;
        for x in [-3.5, 0.0, 1e9] {
            assert_eq!(d.distance(&s(x), &s(x)).unwrap(), 0.0);
        }
    }

    #[test]
    fn empirical_diracs() {
        let d = SpaceDescriptor::Empirical1D { p: 1.0 };
        let a = MetricPoint::Empirical(Empirical::dirac(0.0));
        let b = MetricPoint::Empirical(Empirical::dirac(1.0));
        assert_eq!(d.distance(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn empirical_merges_ties_and_sorts() {
        let e = Empirical::new(vec![2.0, 1.0, 2.0, 5.0], vec![0.25, 0.25, 0.5, 0.0]).unwrap();
        assert_eq!(e.support(), &[1.0, 2.0]);
        assert_eq!(e.weights(), &[0.25, 0.75]);
        assert!(Empirical::new(vec![0.0], vec![0.9]).is_err());
    }

    #[test]
    fn cone_values() {
        let base = SpaceDescriptor::Real;
        let a = MetricPoint::cone(s(0.0), 1.0);
        let b = MetricPoint::cone(s(PI), 1.0);
        assert!((cone_distance(&base, &a, &b).unwrap() - 2.0).abs() < 1e-12);
        // Bases further apart than π are truncated.
        let c = MetricPoint::cone(s(10.0), 1.0);
        assert!((cone_distance(&base, &a, &c).unwrap() - 2.0).abs() < 1e-12);
        let apex = MetricPoint::cone(s(123.0), 0.0);
        let other = MetricPoint::cone(s(-7.0), 2.5);
        assert_eq!(cone_distance(&base, &apex, &other).unwrap(), 2.5);
        assert_eq!(cone_distance(&base, &other, &other).unwrap(), 0.0);
    }

    #[test]
    fn cone_apex_base_is_irrelevant() {
        let base = SpaceDescriptor::Real;
        let other = MetricPoint::cone(s(0.3), 1.7);
        let d1 = cone_distance(&base, &MetricPoint::cone(s(0.0), 0.0), &other).unwrap();
        let d2 = cone_distance(&base, &MetricPoint::cone(s(99.0), 0.0), &other).unwrap();
        assert_eq!(d1, d2);
        let apexes = cone_distance(&base, &MetricPoint::cone(s(1.0), 0.0), &MetricPoint::cone(s(2.0), 0.0));
        assert_eq!(apexes.unwrap(), 0.0);
    }

    #[test]
    fn orthogonal_checked_on_construction() {
        assert!(MetricPoint::orthogonal(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
        assert!(MetricPoint::orthogonal(2, vec![1.0, 1.0, 0.0, 1.0]).is_err());
        let d = SpaceDescriptor::Orthogonal { d: 2 };
        let id = MetricPoint::orthogonal(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let neg = MetricPoint::orthogonal(2, vec![-1.0, 0.0, 0.0, -1.0]).unwrap();
        assert!((d.distance(&id, &neg).unwrap() - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let d = SpaceDescriptor::EuclideanLr { n: 2, r: Exponent::TWO };
        let err = d.distance(&MetricPoint::Vector(vec![1.0]), &MetricPoint::Vector(vec![1.0, 2.0]));
        assert!(matches!(err, Err(Error::ShapeMismatch(_))));
        let err = SpaceDescriptor::Real.distance(&MetricPoint::label("a"), &s(1.0));
        assert!(matches!(err, Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn geodesic_examples() {
        let real = SpaceDescriptor::Real;
        assert_eq!(real.geodesic_point(&s(0.0), &s(4.0), 0.25).unwrap(), s(1.0));
        assert_eq!(real.geodesic_point(&s(-2.0), &s(4.0), 0.0).unwrap(), s(-2.0));
        let e = SpaceDescriptor::EuclideanLr { n: 2, r: Exponent::TWO };
        let mid = e
            .geodesic_point(&MetricPoint::Vector(vec![0.0, 0.0]), &MetricPoint::Vector(vec![2.0, 2.0]), 0.5)
            .unwrap();
        assert_eq!(mid, MetricPoint::Vector(vec![1.0, 1.0]));
    }

    #[test]
    fn geodesic_rejections() {
        let rejected = [
            SpaceDescriptor::LambdaInf,
            SpaceDescriptor::LambdaQ { q: 2.0 },
            SpaceDescriptor::binary(),
            SpaceDescriptor::Orthogonal { d: 2 },
            SpaceDescriptor::Cone { base: Box::new(SpaceDescriptor::Real) },
            SpaceDescriptor::Empirical1D { p: 1.0 },
            SpaceDescriptor::SlackInterleaving { lambda: 1.0, grid: vec![0.0, 1.0] },
            SpaceDescriptor::DampedSup { grid: vec![1.0] },
        ];
        for d in rejected {
            assert!(!d.is_geodesic(), "{}", d.name());
            let err = d.geodesic_point(&s(0.0), &s(1.0), 0.5);
            assert!(matches!(err, Err(Error::NonGeodesicSpace(_))), "{}", d.name());
        }
    }

    #[test]
    fn geodesic_proportionality_on_products() {
        let d = SpaceDescriptor::WeightedProduct {
            factors: vec![
                ProductFactor { space: SpaceDescriptor::Real, weight: 0.3 },
                ProductFactor { space: SpaceDescriptor::EuclideanLr { n: 2, r: Exponent::Infinite }, weight: 0.7 },
            ],
            q: 2.0,
        };
        let a = MetricPoint::Tuple(vec![s(1.0), MetricPoint::Vector(vec![0.0, 3.0])]);
        let b = MetricPoint::Tuple(vec![s(-2.0), MetricPoint::Vector(vec![1.0, -1.0])]);
        let total = d.distance(&a, &b).unwrap();
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let g = d.geodesic_point(&a, &b, t).unwrap();
            assert!((d.distance(&a, &g).unwrap() - t * total).abs() < 1e-9);
            assert!((d.distance(&g, &b).unwrap() - (1.0 - t) * total).abs() < 1e-9);
        }
    }

    #[test]
    fn hausdorff_examples() {
        let d = SpaceDescriptor::Real;
        let set = |v: &[f64]| v.iter().map(|x| s(*x)).collect::<Vec<_>>();
        assert_eq!(hausdorff_distance(&d, &set(&[0.0, 1.0]), &set(&[0.0])).unwrap(), 1.0);
        assert_eq!(hausdorff_distance(&d, &set(&[0.0, 2.0]), &set(&[1.0])).unwrap(), 1.0);
        assert_eq!(hausdorff_distance(&d, &set(&[0.5, 3.0]), &set(&[0.5, 3.0])).unwrap(), 0.0);
        assert!(hausdorff_distance(&d, &[], &set(&[1.0])).is_err());
    }

    #[test]
    fn descriptor_validation() {
        assert!(SpaceDescriptor::LambdaQ { q: 0.5 }.validate().is_err());
        assert!(SpaceDescriptor::DampedSup { grid: vec![0.0, 1.0] }.validate().is_err());
        assert!(SpaceDescriptor::SlackInterleaving { lambda: 1.0, grid: vec![1.0, 1.0] }.validate().is_err());
        assert!(SpaceDescriptor::WeightedProduct {
            factors: vec![ProductFactor { space: SpaceDescriptor::Real, weight: -1.0 }],
            q: 1.0
        }
        .validate()
        .is_err());
        assert!(SpaceDescriptor::Discrete { alphabet: vec!["a".into(), "a".into()] }.validate().is_err());
        assert!(SpaceDescriptor::binary().validate().is_ok());
    }
}
