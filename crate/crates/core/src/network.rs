//! Finite `Z`-networks `(X, ω_X, μ_X)`, attributed-graph ingestion and
//! pointwise invariants.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::json::{number, read_number};
use crate::matrix::Matrix;
use crate::metric::{check_probability, MetricPoint, ProductFactor, SpaceDescriptor};

/// A finite measure network with kernel values in a metric space.
#[derive(Clone, Debug, PartialEq)]
pub struct ZNetwork {
    space: SpaceDescriptor,
    labels: Vec<String>,
    weights: Vec<f64>,
    kernel: Matrix<MetricPoint>,
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

impl ZNetwork {
    pub fn new(space: SpaceDescriptor, labels: Vec<String>, weights: Vec<f64>, kernel: Matrix<MetricPoint>) -> Result<Self> {
        space.validate()?;
        let n = weights.len();
        if n == 0 {
            return Err(Error::Empty("network has no points".into()));
        }
        if labels.len() != n {
            return Err(Error::ShapeMismatch(format!("{} labels for {n} points", labels.len())));
        }
        if kernel.rows() != n || kernel.cols() != n {
            return Err(Error::ShapeMismatch(format!(
                "kernel is {}x{}, expected {n}x{n}",
                kernel.rows(),
                kernel.cols()
            )));
        }
        check_probability(&weights)?;
        for z in kernel.data() {
            space.check(z)?;
        }
        Ok(ZNetwork { space, labels, weights, kernel })
    }

    /// A network with labels `0..n`.
    pub fn with_default_labels(space: SpaceDescriptor, weights: Vec<f64>, kernel: Matrix<MetricPoint>) -> Result<Self> {
        let n = weights.len();
        ZNetwork::new(space, default_labels(n), weights, kernel)
    }

    /// Uniform weights over `n = kernel.rows()` points.
    pub fn uniform(space: SpaceDescriptor, kernel: Matrix<MetricPoint>) -> Result<Self> {
        let n = kernel.rows();
        ZNetwork::with_default_labels(space, vec![1.0 / n as f64; n], kernel)
    }

    /// The one-point network with kernel value `z`.
    pub fn one_point(space: SpaceDescriptor, z: MetricPoint) -> Result<Self> {
        ZNetwork::with_default_labels(space, vec![1.0], Matrix::filled(1, 1, z))
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kernel(&self) -> &Matrix<MetricPoint> {
        &self.kernel
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn omega(&self, i: usize, j: usize) -> &MetricPoint {
        &self.kernel[(i, j)]
    }

    /// Index of the unique point of positive mass, if the measure is a Dirac mass.
    pub fn dirac_index(&self) -> Option<usize> {
        let mut positive = self.weights.iter().enumerate().filter(|(_, w)| **w > 0.0);
        let first = positive.next()?.0;
        positive.next().is_none().then_some(first)
    }

    /// `d_Z(ω(i, i'), z0)` weighted by `μ_i μ_i'`, over all pairs.
    fn norm_over<I>(&self, p: Exponent, z0: &MetricPoint, pairs: I) -> f64
    where
        I: Iterator<Item = (usize, usize)>,
    {
        p.weighted_norm(pairs.map(|(i, k)| {
            (self.weights[i] * self.weights[k], self.space.distance_unchecked(&self.kernel[(i, k)], z0))
        }))
    }

    /// `‖d_Z(ω(·,·), z0)‖_{L^p(μ⊗μ)}`.
    pub fn size(&self, p: Exponent, z0: &MetricPoint) -> Result<f64> {
        self.space.check(z0)?;
        let n = self.len();
        Ok(self.norm_over(p, z0, (0..n).flat_map(|i| (0..n).map(move |k| (i, k)))))
    }

    /// `x ↦ ‖d_Z(ω(x, ·), z0)‖_{L^p(μ)}`.
    pub fn eccentricity_out(&self, p: Exponent, z0: &MetricPoint) -> Result<Vec<f64>> {
        self.space.check(z0)?;
        let n = self.len();
        Ok((0..n)
            .map(|x| p.weighted_norm((0..n).map(|k| (self.weights[k], self.space.distance_unchecked(&self.kernel[(x, k)], z0)))))
            .collect())
    }

    /// `x ↦ ‖d_Z(ω(·, x), z0)‖_{L^p(μ)}`.
    pub fn eccentricity_in(&self, p: Exponent, z0: &MetricPoint) -> Result<Vec<f64>> {
        self.space.check(z0)?;
        let n = self.len();
        Ok((0..n)
            .map(|x| p.weighted_norm((0..n).map(|k| (self.weights[k], self.space.distance_unchecked(&self.kernel[(k, x)], z0)))))
            .collect())
    }

    /// The pushforward `ω_*(μ⊗μ)` as atoms with weights.
    pub fn kernel_pushforward(&self) -> (Vec<MetricPoint>, Vec<f64>) {
        let n = self.len();
        let mut atoms = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            for k in 0..n {
                atoms.push(self.kernel[(i, k)].clone());
                weights.push(self.weights[i] * self.weights[k]);
            }
        }
        (atoms, weights)
    }

    /// Same network with the kernel transposed; its out-eccentricities are the in-eccentricities.
    pub fn transposed(&self) -> Self {
        ZNetwork { kernel: self.kernel.transpose(), ..self.clone() }
    }

    /// Splits point `i` into `multiplicities[i]` copies of weight `μ_i / m_i`,
    /// pulling the kernel back along the collapse map.
    pub fn blow_up(&self, multiplicities: &[usize]) -> Result<Self> {
        let collapse = collapse_map(multiplicities)?;
        if multiplicities.len() != self.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} multiplicities for {} points",
                multiplicities.len(),
                self.len()
            )));
        }
        let total = collapse.len();
        let weights = collapse.iter().map(|&i| self.weights[i] / multiplicities[i] as f64).collect();
        let mut copy_index = vec![0usize; self.len()];
        let labels = collapse
            .iter()
            .map(|&i| {
                copy_index[i] += 1;
                format!("{}#{}", self.labels[i], copy_index[i] - 1)
            })
            .collect();
        let kernel = Matrix::from_fn(total, total, |a, b| self.kernel[(collapse[a], collapse[b])].clone());
        Ok(ZNetwork { space: self.space.clone(), labels, weights, kernel })
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("space".into(), serde_json::to_value(&self.space).expect("descriptors serialize"));
        m.insert("labels".into(), json!(self.labels));
        m.insert("weights".into(), Value::Array(self.weights.iter().map(|w| number(*w)).collect()));
        m.insert(
            "kernel".into(),
            Value::Array(
                (0..self.len())
                    .map(|i| Value::Array(self.kernel.row(i).iter().map(MetricPoint::to_json).collect()))
                    .collect(),
            ),
        );
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("network must be a JSON object".into()))?;
        let space: SpaceDescriptor = serde_json::from_value(field(obj, "space")?.clone())
            .map_err(|e| Error::Parse(format!("bad space descriptor: {e}")))?;
        space.validate()?;
        let weights = read_numbers(field(obj, "weights")?)?;
        let rows = field(obj, "kernel")?
            .as_array()
            .ok_or_else(|| Error::Parse("kernel must be an array of rows".into()))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::Parse("kernel row must be an array".into()))?
                    .iter()
                    .map(|z| space.point_from_json(z))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let kernel = Matrix::from_rows(rows)?;
        let labels = match obj.get("labels") {
            None | Some(Value::Null) => default_labels(weights.len()),
            Some(Value::Array(ls)) => ls
                .iter()
                .map(|l| match l {
                    Value::String(s) => Ok(s.clone()),
                    other => Ok(other.to_string()),
                })
                .collect::<Result<_>>()?,
            Some(other) => return Err(Error::Parse(format!("labels must be an array, found {other}"))),
        };
        ZNetwork::new(space, labels, weights, kernel)
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::Parse(format!("missing field \"{key}\"")))
}

fn read_numbers(v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("expected array of numbers, found {v}")))?
        .iter()
        .map(read_number)
        .collect()
}

/// The map sending each blown-up point to its original index.
pub fn collapse_map(multiplicities: &[usize]) -> Result<Vec<usize>> {
    if let Some(i) = multiplicities.iter().position(|&m| m == 0) {
        return Err(Error::InvalidParameter(format!("multiplicity of point {i} is zero")));
    }
    Ok(multiplicities
        .iter()
        .enumerate()
        .flat_map(|(i, &m)| std::iter::repeat_n(i, m))
        .collect())
}

/// A graph with node features in `Ψ`, real edge weights `φ` and edge features in `Ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributedGraph {
    node_space: SpaceDescriptor,
    edge_space: SpaceDescriptor,
    features: Vec<MetricPoint>,
    phi: Matrix,
    edge_features: Matrix<Option<MetricPoint>>,
    weights: Vec<f64>,
}

impl AttributedGraph {
    /// Validates that edge features are present exactly where `φ > 0`.
    pub fn new(
        node_space: SpaceDescriptor,
        edge_space: SpaceDescriptor,
        features: Vec<MetricPoint>,
        phi: Matrix,
        edge_features: Matrix<Option<MetricPoint>>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        node_space.validate()?;
        edge_space.validate()?;
        let n = weights.len();
        if n == 0 {
            return Err(Error::Empty("graph has no nodes".into()));
        }
        if features.len() != n {
            return Err(Error::ShapeMismatch(format!("{} node features for {n} nodes", features.len())));
        }
        for (what, r, c) in [("phi", phi.rows(), phi.cols()), ("edge features", edge_features.rows(), edge_features.cols())] {
            if r != n || c != n {
                return Err(Error::ShapeMismatch(format!("{what} is {r}x{c}, expected {n}x{n}")));
            }
        }
        check_probability(&weights)?;
        for f in &features {
            node_space.check(f)?;
        }
        for i in 0..n {
            for j in 0..n {
                let w = phi[(i, j)];
                if !(w.is_finite() && w >= 0.0) {
                    return Err(Error::InvalidParameter(format!("edge weight ({i},{j}) = {w} must be >= 0")));
                }
                match (&edge_features[(i, j)], w > 0.0) {
                    (Some(z), true) => edge_space.check(z)?,
                    (None, false) => {}
                    (Some(_), false) => {
                        return Err(Error::InvalidParameter(format!("edge feature on non-edge ({i},{j})")));
                    }
                    (None, true) => return Err(Error::InvalidParameter(format!("edge ({i},{j}) has no feature"))),
                }
            }
        }
        Ok(AttributedGraph { node_space, edge_space, features, phi, edge_features, weights })
    }

    pub fn node_space(&self) -> &SpaceDescriptor {
        &self.node_space
    }

    pub fn edge_space(&self) -> &SpaceDescriptor {
        &self.edge_space
    }

    pub fn features(&self) -> &[MetricPoint] {
        &self.features
    }

    pub fn phi(&self) -> &Matrix {
        &self.phi
    }

    pub fn edge_features(&self) -> &Matrix<Option<MetricPoint>> {
        &self.edge_features
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let n = self.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if let Some(z) = &self.edge_features[(i, j)] {
                    edges.push(json!({ "from": i, "to": j, "value": z.to_json() }));
                }
            }
        }
        let mut m = Map::new();
        m.insert("node_space".into(), serde_json::to_value(&self.node_space).expect("descriptors serialize"));
        m.insert("edge_space".into(), serde_json::to_value(&self.edge_space).expect("descriptors serialize"));
        m.insert("features".into(), Value::Array(self.features.iter().map(MetricPoint::to_json).collect()));
        m.insert(
            "phi".into(),
            Value::Array((0..n).map(|i| Value::Array(self.phi.row(i).iter().map(|x| number(*x)).collect())).collect()),
        );
        m.insert("edge_features".into(), Value::Array(edges));
        m.insert("weights".into(), Value::Array(self.weights.iter().map(|w| number(*w)).collect()));
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("graph must be a JSON object".into()))?;
        let descriptor = |key: &str| -> Result<SpaceDescriptor> {
            serde_json::from_value(field(obj, key)?.clone()).map_err(|e| Error::Parse(format!("bad {key}: {e}")))
        };
        let node_space = descriptor("node_space")?;
        let edge_space = descriptor("edge_space")?;
        node_space.validate()?;
        edge_space.validate()?;
        let weights = read_numbers(field(obj, "weights")?)?;
        let n = weights.len();
        let features = field(obj, "features")?
            .as_array()
            .ok_or_else(|| Error::Parse("features must be an array".into()))?
            .iter()
            .map(|z| node_space.point_from_json(z))
            .collect::<Result<Vec<_>>>()?;
        let phi_rows = field(obj, "phi")?
            .as_array()
            .ok_or_else(|| Error::Parse("phi must be an array of rows".into()))?
            .iter()
            .map(read_numbers)
            .collect::<Result<Vec<_>>>()?;
        let phi = Matrix::from_rows(phi_rows)?;
        let mut edge_features: Matrix<Option<MetricPoint>> = Matrix::filled(n, n, None);
        let edges = field(obj, "edge_features")?
            .as_array()
            .ok_or_else(|| Error::Parse("edge_features must be an array".into()))?;
        for e in edges {
            let index = |key: &str| -> Result<usize> {
                e.get(key)
                    .and_then(Value::as_u64)
                    .map(|x| x as usize)
                    .filter(|&x| x < n)
                    .ok_or_else(|| Error::Parse(format!("edge entry needs an in-range \"{key}\": {e}")))
            };
            let (i, j) = (index("from")?, index("to")?);
            let value = e.get("value").ok_or_else(|| Error::Parse(format!("edge entry needs \"value\": {e}")))?;
            edge_features[(i, j)] = Some(edge_space.point_from_json(value)?);
        }
        AttributedGraph::new(node_space, edge_space, features, phi, edge_features, weights)
    }
}

/// Balance parameters of the fused flattening.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusedParams {
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
}

impl FusedParams {
    pub fn new(alpha: f64, beta: f64, q: f64) -> Result<Self> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(alpha) || !unit(beta) || alpha + beta > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "need alpha, beta in [0, 1] with alpha + beta <= 1, got {alpha}, {beta}"
            )));
        }
        if !(q.is_finite() && q >= 1.0) {
            return Err(Error::InvalidParameter(format!("fused exponent q must lie in [1, inf), got {q}")));
        }
        Ok(FusedParams { alpha, beta, q })
    }

    /// The product space `Ψ × Ω × R` with weights `(1-α-β, α, β)` and exponent `q`.
    pub fn product_space(&self, node_space: &SpaceDescriptor, edge_space: &SpaceDescriptor) -> SpaceDescriptor {
        SpaceDescriptor::WeightedProduct {
            factors: vec![
                ProductFactor { space: node_space.clone(), weight: 1.0 - self.alpha - self.beta },
                ProductFactor { space: edge_space.clone(), weight: self.alpha },
                ProductFactor { space: SpaceDescriptor::Real, weight: self.beta },
            ],
            q: self.q,
        }
    }
}

/// Flattens an attributed graph into a network over `Ψ × Ω × R`.
///
/// Kernel entry `(x, x')` is `(ψ(x), ω(x, x'), φ(x, x'))`, with `fill` in the
/// edge-feature slot where there is no edge.
pub fn from_attributed_graph_fused(g: &AttributedGraph, params: FusedParams, fill: &MetricPoint) -> Result<ZNetwork> {
    g.edge_space.check(fill)?;
    let params = FusedParams::new(params.alpha, params.beta, params.q)?;
    let n = g.len();
    let kernel = Matrix::from_fn(n, n, |i, j| {
        MetricPoint::Tuple(vec![
            g.features[i].clone(),
            g.edge_features[(i, j)].clone().unwrap_or_else(|| fill.clone()),
            MetricPoint::Scalar(g.phi[(i, j)]),
        ])
    });
    ZNetwork::with_default_labels(params.product_space(&g.node_space, &g.edge_space), g.weights.clone(), kernel)
}

/// Encodes an edge-attributed graph in the cone over `Ω`.
///
/// Edges become `[ω(x, x'), φ(x, x')]`; non-edges become the apex `[p₀, 0]`,
/// where `p₀` is the first edge feature in row-major order, or `default_base`
/// if the graph has no edges.
pub fn from_edge_attributed_cone(g: &AttributedGraph, default_base: Option<&MetricPoint>) -> Result<ZNetwork> {
    let base = match g.edge_features.data().iter().flatten().next() {
        Some(z) => z.clone(),
        None => default_base
            .cloned()
            .ok_or_else(|| Error::InvalidParameter("graph has no edges and no default apex base".into()))?,
    };
    g.edge_space.check(&base)?;
    let n = g.len();
    let kernel = Matrix::from_fn(n, n, |i, j| match &g.edge_features[(i, j)] {
        Some(z) => MetricPoint::cone(z.clone(), g.phi[(i, j)]),
        None => MetricPoint::cone(base.clone(), 0.0),
    });
    let space = SpaceDescriptor::Cone { base: Box::new(g.edge_space.clone()) };
    ZNetwork::with_default_labels(space, g.weights.clone(), kernel)
}
