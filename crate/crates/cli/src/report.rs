//! JSON renderings of the library reports and the run manifest.

use serde_json::{json, Map, Value};
use zgw_core::approximation::SandwichReport;
use zgw_core::bounds::BoundReport;
use zgw_core::gw::{OracleResult, SolveReport};
use zgw_core::json::number;
use zgw_core::ot::Coupling;
use zgw_core::Exponent;

/// Command, inputs and configuration of a run.
///
/// Wall time is deliberately absent so that identical manifests give
/// byte-identical documents; it is printed to stderr instead.
#[derive(Clone, Debug)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub config: Map<String, Value>,
}

impl RunManifest {
    pub fn new(command: &str, inputs: Vec<String>) -> Self {
        RunManifest { command: command.into(), inputs, config: Map::new() }
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.config.insert(key.into(), value);
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "inputs": self.inputs,
            "config": Value::Object(self.config.clone()),
            "version": env!("CARGO_PKG_VERSION"),
        })
    }
}

pub fn exponent(p: Exponent) -> Value {
    match p {
        Exponent::Finite(q) => number(q),
        Exponent::Infinite => Value::String("inf".into()),
    }
}

fn option(x: Option<f64>) -> Value {
    x.map_or(Value::Null, number)
}

pub fn coupling(c: &Coupling) -> Value {
    Value::Array(c.matrix().to_rows().into_iter().map(|r| Value::Array(r.into_iter().map(number).collect())).collect())
}

pub fn solve_report(r: &SolveReport, with_coupling: bool) -> Value {
    let mut m = Map::new();
    m.insert("value".into(), number(r.value));
    m.insert("p".into(), exponent(r.p));
    m.insert(
        "flags".into(),
        json!({"exact": r.flags.exact, "converged": r.flags.converged, "heuristic": r.flags.heuristic}),
    );
    m.insert("lower_bound".into(), option(r.lower_bound));
    m.insert("bound_violations".into(), json!(r.bound_violations));
    m.insert(
        "trace".into(),
        Value::Array(
            r.trace
                .iter()
                .map(|t| {
                    json!({
                        "index": t.index,
                        "init": t.init,
                        "value": number(t.value),
                        "iterations": t.iterations,
                        "converged": t.converged,
                    })
                })
                .collect(),
        ),
    );
    if with_coupling {
        m.insert("coupling".into(), coupling(&r.coupling));
    }
    Value::Object(m)
}

pub fn bound_report(r: &BoundReport) -> Value {
    json!({
        "p": exponent(r.p),
        "tlb": number(r.tlb),
        "flb": number(r.flb),
        "szlb": number(r.szlb),
        "slb": option(r.slb),
        "best": number(r.best()),
        "basepoint": r.basepoint.to_json(),
        "ordering_violations": r.ordering_violations,
    })
}

pub fn sandwich_report(r: &SandwichReport) -> Value {
    json!({
        "p": exponent(r.p),
        "r": exponent(r.r),
        "n": r.n,
        "rn_value": number(r.rn_value),
        "rn_exact": r.rn_exact,
        "rn_lower_certificate": number(r.rn_lower_certificate),
        "lower": number(r.lower),
        "upper": number(r.upper),
        "empirical_hausdorff_term": number(r.hausdorff_term),
    })
}

pub fn oracle_result(r: &OracleResult, p: Exponent) -> Value {
    json!({
        "p": exponent(p),
        "value": number(r.value),
        "grid_points": r.grid_points,
        "dimension": r.dimension,
        "coupling": coupling(&r.coupling),
    })
}
