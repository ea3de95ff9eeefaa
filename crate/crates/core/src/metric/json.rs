//! JSON encoding of metric points.
//!
//! Points are not self-describing (a vector and a sampled function are both
//! arrays), so decoding is driven by the descriptor.

use serde_json::{json, Map, Value};

use super::{Empirical, MetricPoint, SpaceDescriptor};
use crate::error::{Error, Result};
use crate::json::number;

fn parse_err(what: &str, v: &Value) -> Error {
    Error::Parse(format!("expected {what}, found {v}"))
}

fn as_f64(v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| parse_err("number", v))
}

fn as_f64_array(v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| parse_err("array of numbers", v))?
        .iter()
        .map(as_f64)
        .collect()
}

impl MetricPoint {
    /// Encodes the point as JSON.
    pub fn to_json(&self) -> Value {
        match self {
            MetricPoint::Scalar(x) => number(*x),
            MetricPoint::Vector(v) | MetricPoint::Sampled(v) => Value::Array(v.iter().map(|x| number(*x)).collect()),
            MetricPoint::Matrix { dim, entries } => Value::Array(
                entries
                    .chunks(*dim.max(&1))
                    .map(|row| Value::Array(row.iter().map(|x| number(*x)).collect()))
                    .collect(),
            ),
            MetricPoint::Cone { base, radius } => json!({ "base": base.to_json(), "radius": number(*radius) }),
            MetricPoint::Tuple(parts) => Value::Array(parts.iter().map(MetricPoint::to_json).collect()),
            MetricPoint::Empirical(e) => {
                let mut m = Map::new();
                m.insert("support".into(), Value::Array(e.support().iter().map(|x| number(*x)).collect()));
                m.insert("weights".into(), Value::Array(e.weights().iter().map(|x| number(*x)).collect()));
                Value::Object(m)
            }
            MetricPoint::Label(s) => Value::String(s.clone()),
        }
    }
}

impl SpaceDescriptor {
    /// Decodes and checks a point of this space.
    pub fn point_from_json(&self, v: &Value) -> Result<MetricPoint> {
        let point = self.decode(v)?;
        self.check(&point)?;
        Ok(point)
    }

    fn decode(&self, v: &Value) -> Result<MetricPoint> {
        match self {
            SpaceDescriptor::Real | SpaceDescriptor::LambdaInf | SpaceDescriptor::LambdaQ { .. } => {
                Ok(MetricPoint::Scalar(as_f64(v)?))
            }
            SpaceDescriptor::EuclideanLr { .. } => Ok(MetricPoint::Vector(as_f64_array(v)?)),
            SpaceDescriptor::SlackInterleaving { .. } | SpaceDescriptor::DampedSup { .. } => {
                Ok(MetricPoint::Sampled(as_f64_array(v)?))
            }
            SpaceDescriptor::WeightedProduct { factors, .. } => {
                let parts = v.as_array().ok_or_else(|| parse_err("tuple array", v))?;
                if parts.len() != factors.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "tuple has {} parts, product has {} factors",
                        parts.len(),
                        factors.len()
                    )));
                }
                let parts = factors
                    .iter()
                    .zip(parts)
                    .map(|(f, p)| f.space.decode(p))
                    .collect::<Result<_>>()?;
                Ok(MetricPoint::Tuple(parts))
            }
            SpaceDescriptor::Cone { base } => {
                let obj = v.as_object().ok_or_else(|| parse_err("cone object", v))?;
                let b = obj.get("base").ok_or_else(|| parse_err("cone base", v))?;
                let r = obj.get("radius").ok_or_else(|| parse_err("cone radius", v))?;
                Ok(MetricPoint::cone(base.decode(b)?, as_f64(r)?))
            }
            SpaceDescriptor::Orthogonal { d } => {
                let rows = v.as_array().ok_or_else(|| parse_err("matrix", v))?;
                let entries = if rows.iter().all(Value::is_array) {
                    let mut entries = Vec::with_capacity(d * d);
                    for row in rows {
                        let row = as_f64_array(row)?;
                        if row.len() != *d {
                            return Err(Error::ShapeMismatch(format!("matrix row of length {}, expected {d}", row.len())));
                        }
                        entries.extend(row);
                    }
                    entries
                } else {
                    as_f64_array(v)?
                };
                MetricPoint::orthogonal(*d, entries)
            }
            SpaceDescriptor::Empirical1D { .. } => {
                let obj = v.as_object().ok_or_else(|| parse_err("empirical object", v))?;
                let support = as_f64_array(obj.get("support").ok_or_else(|| parse_err("support", v))?)?;
                let weights = as_f64_array(obj.get("weights").ok_or_else(|| parse_err("weights", v))?)?;
                Ok(MetricPoint::Empirical(Empirical::new(support, weights)?))
            }
            SpaceDescriptor::Discrete { .. } => match v {
                Value::String(s) => Ok(MetricPoint::Label(s.clone())),
                Value::Number(n) => Ok(MetricPoint::Label(n.to_string())),
                _ => Err(parse_err("label", v)),
            },
        }
    }
}
