use std::path::Path;

use serde_json::{json, Value};
use zgw_core::approximation::{kernel_values, landmark_fps, sandwich};
use zgw_core::bounds::{bound_report_directed, Direction};
use zgw_core::geometry::{
    contraction_holder_check, contraction_path, geodesic_interpolate, mixture_coupling, mixture_holder_check,
    mixture_path, verify_geodesic, Carrier,
};
use zgw_core::gw::{brute_force_gw, distortion, solve_gw, SolveConfig};
use zgw_core::json::{number, to_canonical_string};
use zgw_core::network::{from_attributed_graph_fused, from_edge_attributed_cone, AttributedGraph, FusedParams};
use zgw_core::ot::Coupling;
use zgw_core::{Error, Exponent, MetricPoint, SpaceDescriptor, ZNetwork};

use crate::report::{self, RunManifest};
use crate::{CliError, Command, DirectionArg, IngestMode, Outcome, PathKind, SolverArgs, SIZE_CAP_ENV};

fn read_json(path: &Path) -> Result<Value, CliError> {
    let input = |message: String| CliError::Input { path: path.display().to_string(), message };
    let text = std::fs::read_to_string(path).map_err(|e| input(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| input(e.to_string()))
}

pub fn load_network(path: &Path) -> Result<ZNetwork, CliError> {
    let v = read_json(path)?;
    ZNetwork::from_json(&v).map_err(|e| CliError::Input { path: path.display().to_string(), message: e.to_string() })
}

fn parse_point(space: &SpaceDescriptor, literal: &str) -> Result<MetricPoint, CliError> {
    let v: Value = serde_json::from_str(literal).map_err(|e| CliError::Argument(format!("point '{literal}': {e}")))?;
    let z = space.point_from_json(&v).map_err(|e| CliError::Argument(format!("point '{literal}': {e}")))?;
    space.check(&z).map_err(|e| CliError::Argument(format!("point '{literal}': {e}")))?;
    Ok(z)
}

fn parse_times(list: &str) -> Result<Vec<f64>, CliError> {
    let times = list
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| CliError::Argument(format!("time '{s}': {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if times.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(CliError::Argument(format!("times must lie in [0, 1]: {list}")));
    }
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(CliError::Argument(format!("times must be sorted: {list}")));
    }
    Ok(times)
}

fn size_cap() -> Result<usize, CliError> {
    match std::env::var(SIZE_CAP_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Argument(format!("{SIZE_CAP_ENV}={v} is not a size"))),
        Err(_) => Ok(SolveConfig::default().size_cap),
    }
}

fn solve_config(args: &SolverArgs) -> Result<SolveConfig, CliError> {
    Ok(SolveConfig {
        p: args.p,
        restarts: args.restarts,
        tolerance: args.tol,
        seed: args.seed,
        size_cap: size_cap()?,
        ..SolveConfig::default()
    })
}

fn solver_manifest(m: RunManifest, args: &SolverArgs) -> Result<RunManifest, CliError> {
    Ok(m.with("p", report::exponent(args.p))
        .with("seed", json!(args.seed))
        .with("restarts", json!(args.restarts))
        .with("tol", number(args.tol))
        .with("size_cap", json!(size_cap()?)))
}

fn paths(ps: &[&Path]) -> Vec<String> {
    ps.iter().map(|p| p.display().to_string()).collect()
}

fn document(manifest: &RunManifest, key: &str, body: Value) -> Outcome {
    let doc = json!({ "manifest": manifest.to_json(), key: body });
    Outcome { json: to_canonical_string(&doc), exit_code: 0 }
}

pub fn dispatch(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Dist { a, b, solver, verify, coupling } => {
            let (x, y) = (load_network(a)?, load_network(b)?);
            let config = SolveConfig { verify_bounds: *verify, ..solve_config(solver)? };
            let r = solve_gw(&x, &y, &config)?;
            let manifest = solver_manifest(RunManifest::new("dist", paths(&[a, b])), solver)?
                .with("verify", json!(verify))
                .with("coupling", json!(coupling));
            Ok(document(&manifest, "report", report::solve_report(&r, *coupling)))
        }
        Command::Bounds { a, b, p, z0, direction } => {
            let (x, y) = (load_network(a)?, load_network(b)?);
            if x.space() != y.space() {
                return Err(Error::IncompatibleSpaces.into());
            }
            let basepoint = z0.as_deref().map(|lit| parse_point(x.space(), lit)).transpose()?;
            let dir = match direction {
                DirectionArg::Out => Direction::Out,
                DirectionArg::In => Direction::In,
            };
            let r = bound_report_directed(&x, &y, *p, basepoint.as_ref(), dir)?;
            let manifest = RunManifest::new("bounds", paths(&[a, b]))
                .with("p", report::exponent(*p))
                .with("z0", z0.as_deref().map_or(Value::Null, |s| json!(s)))
                .with("direction", json!(format!("{direction:?}").to_lowercase()));
            Ok(document(&manifest, "report", report::bound_report(&r)))
        }
        Command::Approx { a, b, solver, landmarks, r } => {
            let (x, y) = (load_network(a)?, load_network(b)?);
            if x.space() != y.space() {
                return Err(Error::IncompatibleSpaces.into());
            }
            let values = kernel_values(&[&x, &y]);
            let k = (*landmarks).min(values.len());
            let q = landmark_fps(x.space(), &values, k, solver.seed)?;
            let report = sandwich(&x, &y, &q, solver.p, *r, &solve_config(solver)?)?;
            let manifest = solver_manifest(RunManifest::new("approx", paths(&[a, b])), solver)?
                .with("landmarks", json!(landmarks))
                .with("r", report::exponent(*r));
            let mut body = report::sandwich_report(&report);
            body["landmarks"] = Value::Array(q.points().iter().map(MetricPoint::to_json).collect());
            Ok(document(&manifest, "report", body))
        }
        Command::Interp { a, b, kind, times, solver, z0, csv } => interp(a, b.as_deref(), *kind, times, solver, z0.as_deref(), csv.as_deref()),
        Command::Ingest { graph, mode, alpha, beta, q, fill, default_base } => {
            let v = read_json(graph)?;
            let g = AttributedGraph::from_json(&v)
                .map_err(|e| CliError::Input { path: graph.display().to_string(), message: e.to_string() })?;
            let mut manifest = RunManifest::new("ingest", paths(&[graph])).with("mode", json!(format!("{mode:?}").to_lowercase()));
            let net = match mode {
                IngestMode::Fused => {
                    let literal = fill.as_deref().ok_or_else(|| CliError::Argument("fused mode needs --fill".into()))?;
                    let fill_point = parse_point(g.edge_space(), literal)?;
                    manifest = manifest
                        .with("alpha", number(*alpha))
                        .with("beta", number(*beta))
                        .with("q", number(*q))
                        .with("fill", json!(literal));
                    from_attributed_graph_fused(&g, FusedParams::new(*alpha, *beta, *q)?, &fill_point)?
                }
                IngestMode::Cone => {
                    let base = default_base.as_deref().map(|lit| parse_point(g.edge_space(), lit)).transpose()?;
                    manifest = manifest.with("default_base", default_base.as_deref().map_or(Value::Null, |s| json!(s)));
                    from_edge_attributed_cone(&g, base.as_ref())?
                }
            };
            // The output is itself a network file, with the manifest alongside.
            let mut doc = net.to_json();
            doc["manifest"] = manifest.to_json();
            Ok(Outcome { json: to_canonical_string(&doc), exit_code: 0 })
        }
        Command::Oracle { a, b, p, resolution } => {
            let (x, y) = (load_network(a)?, load_network(b)?);
            let r = brute_force_gw(&x, &y, *p, *resolution)?;
            let manifest = RunManifest::new("oracle", paths(&[a, b]))
                .with("p", report::exponent(*p))
                .with("resolution", json!(resolution));
            Ok(document(&manifest, "report", report::oracle_result(&r, *p)))
        }
        Command::Selftest { seed } => {
            let (body, passed) = crate::selftest::run_all(*seed);
            let manifest = RunManifest::new("selftest", Vec::new()).with("seed", json!(seed));
            let mut out = document(&manifest, "report", body);
            out.exit_code = if passed { 0 } else { 1 };
            Ok(out)
        }
    }
}

struct Sample {
    s: f64,
    t: f64,
    distortion: f64,
    bound: Option<f64>,
}

fn sample_json(samples: &[Sample]) -> Value {
    Value::Array(
        samples
            .iter()
            .map(|e| {
                json!({
                    "s": number(e.s),
                    "t": number(e.t),
                    "distortion": number(e.distortion),
                    "bound": e.bound.map_or(Value::Null, number),
                })
            })
            .collect(),
    )
}

fn write_csv(path: &Path, samples: &[Sample]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(e.into()))?;
    let fmt = |x: f64| format!("{x:.16e}");
    w.write_record(["s", "t", "distortion", "bound"]).map_err(|e| CliError::Io(e.into()))?;
    for e in samples {
        w.write_record([fmt(e.s), fmt(e.t), fmt(e.distortion), e.bound.map(fmt).unwrap_or_default()])
            .map_err(|e| CliError::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

/// Pairs `s ≤ t` of the sample times, by index.
fn ordered_pairs(times: &[f64]) -> impl Iterator<Item = (f64, f64)> + '_ {
    (0..times.len()).flat_map(move |i| (i..times.len()).map(move |j| (times[i], times[j])))
}

/// `(distortion, bound)` of the explicit mixture coupling, both on the distortion scale.
fn mixture_sample(x: &ZNetwork, y: &ZNetwork, fill: &MetricPoint, pi: &Coupling, p: Exponent, s: f64, t: f64) -> Result<Sample, CliError> {
    if p.is_infinite() {
        let c = mixture_coupling(x, y, pi, s, t)?;
        let d = distortion(&mixture_path(x, y, fill, s)?, &mixture_path(x, y, fill, t)?, &c, p)?;
        return Ok(Sample { s, t, distortion: d, bound: None });
    }
    let h = mixture_holder_check(x, y, fill, pi, p, s, t)?;
    Ok(Sample { s, t, distortion: 2.0 * h.gw_upper, bound: Some(2.0 * h.bound) })
}

fn interp(
    a: &Path,
    b: Option<&Path>,
    kind: PathKind,
    times: &str,
    solver: &SolverArgs,
    z0: Option<&str>,
    csv: Option<&Path>,
) -> Result<Outcome, CliError> {
    let times_list = parse_times(times)?;
    let x = load_network(a)?;
    let p = solver.p;
    let mut inputs = vec![a];
    let second = |b: Option<&Path>| -> Result<ZNetwork, CliError> {
        let path = b.ok_or_else(|| CliError::Argument("this path kind needs two networks".into()))?;
        let y = load_network(path)?;
        if x.space() != y.space() {
            return Err(Error::IncompatibleSpaces.into());
        }
        Ok(y)
    };
    let point = |lit: Option<&str>| match lit {
        Some(l) => parse_point(x.space(), l),
        None => Ok(x.omega(0, 0).clone()),
    };
    let mut extra = serde_json::Map::new();
    let (networks, samples) = match kind {
        PathKind::Mixture => {
            let y = second(b)?;
            inputs.push(b.expect("checked above"));
            let fill = point(z0)?;
            let pi = solve_gw(&x, &y, &solve_config(solver)?)?.coupling;
            let nets = times_list.iter().map(|&t| mixture_path(&x, &y, &fill, t)).collect::<Result<Vec<_>, _>>()?;
            let samples = ordered_pairs(&times_list)
                .map(|(s, t)| mixture_sample(&x, &y, &fill, &pi, p, s, t))
                .collect::<Result<Vec<_>, _>>()?;
            extra.insert("fill".into(), fill.to_json());
            (nets, samples)
        }
        PathKind::Contraction => {
            if b.is_some() {
                return Err(CliError::Argument("contraction paths take a single network".into()));
            }
            let z = point(z0)?;
            let nets = times_list.iter().map(|&t| contraction_path(&x, &z, t)).collect::<Result<Vec<_>, _>>()?;
            let one = ZNetwork::one_point(x.space().clone(), z.clone())?;
            let pi = Coupling::product(x.weights(), &[1.0]);
            let samples = ordered_pairs(&times_list)
                .map(|(s, t)| {
                    if p.is_infinite() {
                        return mixture_sample(&x, &one, &z, &pi, p, s, t);
                    }
                    let h = contraction_holder_check(&x, &z, p, s, t)?;
                    Ok(Sample { s, t, distortion: 2.0 * h.gw_upper, bound: Some(2.0 * h.bound) })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            extra.insert("target".into(), z.to_json());
            (nets, samples)
        }
        PathKind::Geodesic => {
            let y = second(b)?;
            inputs.push(b.expect("checked above"));
            if !x.space().is_geodesic() {
                return Err(Error::NonGeodesicSpace(x.space().name().into()).into());
            }
            let solved = solve_gw(&x, &y, &solve_config(solver)?)?;
            let carrier = if p.is_infinite() { Carrier::Full } else { Carrier::Support(0.0) };
            let report = verify_geodesic(&x, &y, &solved.coupling, p, &times_list, carrier)?;
            let nets = times_list
                .iter()
                .map(|&t| geodesic_interpolate(&x, &y, &solved.coupling, t, carrier))
                .collect::<Result<Vec<_>, _>>()?;
            let samples = report
                .samples
                .iter()
                .filter(|e| e.s <= e.t)
                .map(|e| Sample { s: e.s, t: e.t, distortion: e.distortion, bound: Some(e.expected) })
                .collect();
            extra.insert("coupling_distortion".into(), number(report.coupling_distortion));
            extra.insert("coupling_exact".into(), json!(solved.flags.exact));
            extra.insert("max_identity_error".into(), number(report.max_identity_error()));
            extra.insert("geodesic_inequality".into(), report.geodesic_inequality(1e-9).map_or(Value::Null, Value::Bool));
            (nets, samples)
        }
    };
    if let Some(path) = csv {
        write_csv(path, &samples)?;
    }
    let mut manifest = solver_manifest(RunManifest::new("interp", paths(&inputs)), solver)?
        .with("kind", json!(format!("{kind:?}").to_lowercase()))
        .with("times", Value::Array(times_list.iter().map(|&t| number(t)).collect()))
        .with("z0", z0.map_or(Value::Null, |s| json!(s)));
    if let Some(path) = csv {
        manifest = manifest.with("csv", json!(path.display().to_string()));
    }
    let mut body = serde_json::Map::new();
    body.insert("kind".into(), json!(format!("{kind:?}").to_lowercase()));
    body.insert("times".into(), Value::Array(times_list.iter().map(|&t| number(t)).collect()));
    body.insert("networks".into(), Value::Array(networks.iter().map(ZNetwork::to_json).collect()));
    body.insert("samples".into(), sample_json(&samples));
    body.extend(extra);
    Ok(document(&manifest, "report", Value::Object(body)))
}
