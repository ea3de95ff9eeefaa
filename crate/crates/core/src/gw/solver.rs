//! Conditional-gradient minimization of the distortion with restarts.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    brute_force_gw, check_coupling, check_pair, support_distortion, DistortionTensor, MAX_ORACLE_DIMENSION,
    SUPPORT_THRESHOLD,
};
use crate::bounds;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matrix::Matrix;
use crate::network::ZNetwork;
use crate::ot::{solve_ot_exact, Coupling};

/// Exponents used for the `p = ∞` continuation.
const CONTINUATION: [f64; 3] = [2.0, 8.0, 32.0];
/// Grid resolution used when `p = ∞` instances are small enough for the oracle.
const INFINITE_ORACLE_RESOLUTION: usize = 10;
/// Random vertices mixed into each random start.
const RANDOM_VERTICES: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitStrategy {
    /// Start from `μ ⊗ ν` only.
    Product,
    /// `restarts` seeded random starts.
    Random,
    /// Start from `SolveConfig::supplied` only.
    Supplied,
    /// Product, the supplied coupling if any, and `restarts` random starts.
    All,
}

impl std::str::FromStr for InitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(InitStrategy::Product),
            "random" => Ok(InitStrategy::Random),
            "supplied" => Ok(InitStrategy::Supplied),
            "all" => Ok(InitStrategy::All),
            other => Err(Error::Parse(format!("unknown init strategy '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub p: Exponent,
    pub restarts: usize,
    pub max_outer_iters: usize,
    /// Relative Frank-Wolfe gap at which a run stops.
    pub tolerance: f64,
    pub seed: u64,
    pub init: InitStrategy,
    pub supplied: Option<Coupling>,
    /// Cells at or below this mass are ignored by the `p = ∞` distortion.
    pub support_threshold: f64,
    /// Largest accepted network size.
    pub size_cap: usize,
    /// Compute the lower-bound hierarchy and record any bound above the value.
    pub verify_bounds: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            p: Exponent::TWO,
            restarts: 8,
            max_outer_iters: 500,
            tolerance: 1e-9,
            seed: 0,
            init: InitStrategy::All,
            supplied: None,
            support_threshold: SUPPORT_THRESHOLD,
            size_cap: 256,
            verify_bounds: false,
        }
    }
}

impl SolveConfig {
    pub fn with_p(p: Exponent) -> Self {
        SolveConfig { p, ..SolveConfig::default() }
    }

    /// Only the supplied coupling as the start.
    pub fn supplied(p: Exponent, coupling: Coupling) -> Self {
        SolveConfig { p, init: InitStrategy::Supplied, supplied: Some(coupling), ..SolveConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_outer_iters == 0 {
            return Err(Error::InvalidParameter("restarts and iteration counts must be positive".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {} must be >= 0", self.tolerance)));
        }
        if !(self.support_threshold > 0.0 && self.support_threshold < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "support threshold {} must lie in (0, 1)",
                self.support_threshold
            )));
        }
        if self.init == InitStrategy::Supplied && self.supplied.is_none() {
            return Err(Error::InvalidParameter("supplied init requested without a coupling".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartTrace {
    pub index: usize,
    pub init: String,
    /// Distortion of this run's best coupling, halved.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveFlags {
    /// The value is the GW distance, not only an upper bound.
    pub exact: bool,
    pub converged: bool,
    /// Produced by the `p = ∞` continuation heuristic.
    pub heuristic: bool,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    /// `distortion(coupling) / 2`, an upper bound on the GW distance.
    pub value: f64,
    pub coupling: Coupling,
    pub p: Exponent,
    pub trace: Vec<RestartTrace>,
    pub flags: SolveFlags,
    /// Largest lower bound from the hierarchy, when requested.
    pub lower_bound: Option<f64>,
    /// Bounds that exceeded the value by more than `1e-9`.
    pub bound_violations: Vec<String>,
}

fn check_size(x: &ZNetwork, y: &ZNetwork, cap: usize) -> Result<()> {
    let size = x.len().max(y.len());
    if size > cap {
        return Err(Error::SizeCap { size, cap });
    }
    Ok(())
}

/// Exact GW when one side is a Dirac mass: the product coupling is the only coupling.
pub fn gw_exact_dirac(x: &ZNetwork, y: &ZNetwork, p: Exponent) -> Result<SolveReport> {
    check_pair(x, y)?;
    if x.dirac_index().is_none() && y.dirac_index().is_none() {
        return Err(Error::InvalidParameter("neither network is a Dirac measure".into()));
    }
    let coupling = Coupling::product(x.weights(), y.weights());
    let value = support_distortion(x, y, &coupling.support(0.0), p) / 2.0;
    Ok(SolveReport {
        value,
        coupling,
        p,
        trace: vec![RestartTrace { index: 0, init: "product".into(), value, iterations: 0, converged: true }],
        flags: SolveFlags { exact: true, converged: true, heuristic: false },
        lower_bound: None,
        bound_violations: Vec::new(),
    })
}

/// Minimizes the distortion by Frank-Wolfe with exact LP steps and exact line search.
///
/// The returned value is always `distortion(coupling) / 2` of a feasible
/// coupling, hence an upper bound on the GW distance. Dirac instances are
/// solved exactly. For `p = ∞` small instances go to the grid oracle (exact,
/// since the optimum is attained at a polytope vertex and the grid contains
/// every vertex); larger ones use a `p = 2 → 8 → 32` continuation and are
/// flagged heuristic.
pub fn solve_gw(x: &ZNetwork, y: &ZNetwork, config: &SolveConfig) -> Result<SolveReport> {
    check_pair(x, y)?;
    config.validate()?;
    check_size(x, y, config.size_cap)?;
    if let Some(c) = &config.supplied {
        check_coupling(x, y, c)?;
    }

    let mut report = if x.dirac_index().is_some() || y.dirac_index().is_some() {
        gw_exact_dirac(x, y, config.p)?
    } else if config.p.is_infinite() {
        if (x.len() - 1) * (y.len() - 1) <= MAX_ORACLE_DIMENSION {
            let oracle = brute_force_gw(x, y, Exponent::Infinite, INFINITE_ORACLE_RESOLUTION)?;
            SolveReport {
                value: oracle.value,
                coupling: oracle.coupling,
                p: config.p,
                trace: vec![RestartTrace {
                    index: 0,
                    init: "oracle".into(),
                    value: oracle.value,
                    iterations: oracle.grid_points,
                    converged: true,
                }],
                flags: SolveFlags { exact: true, converged: true, heuristic: false },
                lower_bound: None,
                bound_violations: Vec::new(),
            }
        } else {
            solve_infinite(x, y, config)
        }
    } else {
        solve_finite(x, y, config)
    };

    let cut = if config.p.is_infinite() { config.support_threshold } else { 0.0 };
    report.value = support_distortion(x, y, &report.coupling.support(cut), config.p) / 2.0;

    if config.verify_bounds {
        let b = bounds::bound_report(x, y, config.p, None)?;
        let mut best: f64 = 0.0;
        for (name, v) in b.values() {
            best = best.max(v);
            if v > report.value + 1e-9 {
                report.bound_violations.push(format!("{name} = {v} exceeds value {}", report.value));
            }
        }
        report.lower_bound = Some(best);
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug)]
enum Start {
    Product,
    Supplied,
    Random,
}

impl Start {
    fn name(self) -> &'static str {
        match self {
            Start::Product => "product",
            Start::Supplied => "supplied",
            Start::Random => "random",
        }
    }
}

fn starts(config: &SolveConfig) -> Vec<Start> {
    let random = std::iter::repeat_n(Start::Random, config.restarts);
    match config.init {
        InitStrategy::Product => vec![Start::Product],
        InitStrategy::Supplied => vec![Start::Supplied],
        InitStrategy::Random => random.collect(),
        InitStrategy::All => {
            let mut v = vec![Start::Product];
            if config.supplied.is_some() {
                v.push(Start::Supplied);
            }
            v.extend(random);
            v
        }
    }
}

/// A Dirichlet(1) mixture of the product coupling and random LP vertices.
fn random_start(mu: &[f64], nu: &[f64], seed: u64, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let (n, m) = (mu.len(), nu.len());
    let mut parts = vec![Coupling::product(mu, nu).matrix().data().to_vec()];
    for _ in 0..RANDOM_VERTICES {
        let cost = Matrix::from_fn(n, m, |_, _| rng.gen::<f64>());
        let vertex = solve_ot_exact(&cost, mu, nu).expect("marginals were validated").coupling;
        parts.push(vertex.matrix().data().to_vec());
    }
    let raw: Vec<f64> = parts.iter().map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    let mut pi = vec![0.0; n * m];
    for (part, w) in parts.iter().zip(&raw) {
        for (a, v) in part.iter().enumerate() {
            pi[a] += w / total * v;
        }
    }
    pi
}

fn initial(start: Start, x: &ZNetwork, y: &ZNetwork, config: &SolveConfig, index: usize) -> Vec<f64> {
    match start {
        Start::Product => Coupling::product(x.weights(), y.weights()).matrix().data().to_vec(),
        Start::Supplied => config.supplied.as_ref().expect("validated").matrix().data().to_vec(),
        Start::Random => random_start(x.weights(), y.weights(), config.seed, index),
    }
}

fn sparse(pi: &[f64]) -> Vec<(usize, f64)> {
    pi.iter().copied().enumerate().filter(|&(_, w)| w > 0.0).collect()
}

fn objective(pi: &[f64], g: &[f64]) -> f64 {
    0.5 * pi.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
}

struct Run {
    best: Vec<f64>,
    iterations: usize,
    converged: bool,
    vertices: Vec<Vec<f64>>,
}

/// One Frank-Wolfe run on the normalized objective `F(π) = Σ π_a π_b L_ab`.
fn frank_wolfe(
    tensor: &DistortionTensor,
    mu: &[f64],
    nu: &[f64],
    start: Vec<f64>,
    config: &SolveConfig,
    keep_vertices: bool,
) -> Run {
    let (n, m) = (mu.len(), nu.len());
    let mut pi = start;
    let mut g = tensor.gradient(&sparse(&pi));
    let mut f = objective(&pi, &g);
    let mut best = (f, pi.clone());
    let mut vertices = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_outer_iters {
        iterations += 1;
        let cost = Matrix::from_vec(n, m, g.clone()).expect("gradient has n*m entries");
        let s = solve_ot_exact(&cost, mu, nu).expect("marginals were validated").coupling.matrix().data().to_vec();
        let gs = tensor.gradient(&sparse(&s));
        let fs = objective(&s, &gs);
        if fs < best.0 {
            best = (fs, s.clone());
        }
        let gap: f64 = g.iter().zip(pi.iter().zip(&s)).map(|(ga, (p, q))| ga * (p - q)).sum();
        if keep_vertices {
            vertices.push(s.clone());
        }
        if gap <= config.tolerance * f + 1e-15 {
            converged = true;
            break;
        }
        // F(π + γD) = F(π) - γ·gap + γ²·a2 with D = s - π.
        let a2: f64 = 0.5
            * s.iter()
                .zip(&pi)
                .zip(gs.iter().zip(&g))
                .map(|((q, p), (hq, hp))| (q - p) * (hq - hp))
                .sum::<f64>();
        let step = if a2 > 0.0 { (gap / (2.0 * a2)).min(1.0) } else { 1.0 };
        for a in 0..pi.len() {
            pi[a] += step * (s[a] - pi[a]);
            g[a] += step * (gs[a] - g[a]);
        }
        f = objective(&pi, &g);
        if f < best.0 {
            best = (f, pi.clone());
        }
    }
    Run { best: best.1, iterations, converged, vertices }
}

fn coupling_of(pi: Vec<f64>, x: &ZNetwork, y: &ZNetwork) -> Coupling {
    let matrix = Matrix::from_vec(x.len(), y.len(), pi).expect("coupling has n*m entries");
    Coupling::from_parts(matrix, x.weights(), y.weights())
}

struct Batch {
    best: (f64, usize, Coupling),
    trace: Vec<RestartTrace>,
    vertices: Vec<Vec<f64>>,
    converged: bool,
}

/// Runs every start at finite exponent `p`, in parallel, and keeps the
/// lexicographically smallest `(value, start index)`.
fn run_batch(x: &ZNetwork, y: &ZNetwork, p: f64, inits: &[(String, Vec<f64>)], config: &SolveConfig, keep_vertices: bool) -> Batch {
    let tensor = DistortionTensor::new(x, y, p);
    let runs: Vec<(RestartTrace, Coupling, Vec<Vec<f64>>)> = inits
        .par_iter()
        .enumerate()
        .map(|(index, (name, start))| {
            let run = frank_wolfe(&tensor, x.weights(), y.weights(), start.clone(), config, keep_vertices);
            let coupling = coupling_of(run.best, x, y);
            let g = tensor.gradient(&sparse(coupling.matrix().data()));
            let value = tensor.to_distortion(objective(coupling.matrix().data(), &g)) / 2.0;
            let trace = RestartTrace { index, init: name.clone(), value, iterations: run.iterations, converged: run.converged };
            (trace, coupling, run.vertices)
        })
        .collect();
    let mut best: Option<(f64, usize, Coupling)> = None;
    let mut trace = Vec::with_capacity(runs.len());
    let mut vertices = Vec::new();
    for (t, c, v) in runs {
        if best.as_ref().is_none_or(|b| t.value < b.0) {
            best = Some((t.value, t.index, c));
        }
        vertices.extend(v);
        trace.push(t);
    }
    let converged = trace.iter().any(|t| t.converged);
    Batch { best: best.expect("at least one start"), trace, vertices, converged }
}

fn initial_starts(x: &ZNetwork, y: &ZNetwork, config: &SolveConfig) -> Vec<(String, Vec<f64>)> {
    starts(config)
        .into_iter()
        .enumerate()
        .map(|(index, s)| (s.name().to_string(), initial(s, x, y, config, index)))
        .collect()
}

fn solve_finite(x: &ZNetwork, y: &ZNetwork, config: &SolveConfig) -> SolveReport {
    let p = config.p.value();
    let batch = run_batch(x, y, p, &initial_starts(x, y, config), config, false);
    let (value, _, coupling) = batch.best;
    SolveReport {
        value,
        coupling,
        p: config.p,
        trace: batch.trace,
        flags: SolveFlags { exact: false, converged: batch.converged, heuristic: false },
        lower_bound: None,
        bound_violations: Vec::new(),
    }
}

fn solve_infinite(x: &ZNetwork, y: &ZNetwork, config: &SolveConfig) -> SolveReport {
    let tau = config.support_threshold;
    let dis_inf = |c: &Coupling| support_distortion(x, y, &c.support(tau), Exponent::Infinite);

    // Candidates: product, supplied, and every LP vertex met along the way.
    // Mixtures never beat their vertices for p = ∞, since support only grows.
    let mut candidates: Vec<(String, Coupling)> = vec![("product".into(), Coupling::product(x.weights(), y.weights()))];
    if let Some(c) = &config.supplied {
        candidates.push(("supplied".into(), c.clone()));
    }
    let mut inits = initial_starts(x, y, config);
    let mut trace = Vec::new();
    let mut converged = false;
    for (stage, &p) in CONTINUATION.iter().enumerate() {
        let batch = run_batch(x, y, p, &inits, config, true);
        converged = batch.converged;
        for mut t in batch.trace {
            t.index += trace.len();
            t.init = format!("p={p}:{}", t.init);
            trace.push(t);
        }
        for v in batch.vertices {
            candidates.push((format!("vertex@p={p}"), coupling_of(v, x, y)));
        }
        let (_, _, best) = batch.best;
        if stage + 1 < CONTINUATION.len() {
            inits = vec![(format!("continued from p={p}"), best.matrix().data().to_vec())];
        }
    }
    // The p = ∞ distortion only depends on the support, so repeated supports are skipped.
    let mut seen = HashSet::new();
    let mut chosen = 0;
    let mut chosen_value = f64::INFINITY;
    for (k, (_, c)) in candidates.iter().enumerate() {
        let cells: Vec<(usize, usize)> = c.support(tau).into_iter().map(|(i, j, _)| (i, j)).collect();
        if !seen.insert(cells) {
            continue;
        }
        let v = dis_inf(c);
        if v < chosen_value {
            chosen = k;
            chosen_value = v;
        }
    }
    let (name, coupling) = candidates.swap_remove(chosen);
    trace.push(RestartTrace { index: trace.len(), init: name, value: chosen_value / 2.0, iterations: 0, converged });
    SolveReport {
        value: chosen_value / 2.0,
        coupling,
        p: config.p,
        trace,
        flags: SolveFlags { exact: false, converged, heuristic: true },
        lower_bound: None,
        bound_violations: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{MetricPoint, SpaceDescriptor};

    fn real(weights: Vec<f64>, rows: Vec<Vec<f64>>) -> ZNetwork {
        let k = Matrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(MetricPoint::Scalar).collect()).collect()).unwrap();
        ZNetwork::with_default_labels(SpaceDescriptor::Real, weights, k).unwrap()
    }

    #[test]
    fn identical_with_diagonal_start() {
        let x = real(vec![0.2, 0.3, 0.5], vec![vec![0.0, 1.0, 4.0], vec![1.0, 0.0, 2.0], vec![4.0, 2.0, 0.0]]);
        let config = SolveConfig::supplied(Exponent::TWO, Coupling::diagonal(x.weights()));
        let r = solve_gw(&x, &x, &config).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn finds_permutation() {
        // y is x with points 0 and 2 swapped.
        let x = real(vec![1.0 / 3.0; 3], vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 3.0], vec![5.0, 3.0, 0.0]]);
        let y = real(vec![1.0 / 3.0; 3], vec![vec![0.0, 3.0, 5.0], vec![3.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]]);
        for p in [Exponent::ONE, Exponent::TWO, Exponent::Infinite] {
            let r = solve_gw(&x, &y, &SolveConfig::with_p(p)).unwrap();
            assert!(r.value < 1e-9, "p={p}: {}", r.value);
        }
    }

    #[test]
    fn dirac_is_exact() {
        let space = SpaceDescriptor::binary();
        let x = ZNetwork::one_point(space.clone(), MetricPoint::label("0")).unwrap();
        let y = ZNetwork::one_point(space, MetricPoint::label("1")).unwrap();
        for p in [Exponent::ONE, Exponent::TWO, Exponent::Infinite] {
            let r = solve_gw(&x, &y, &SolveConfig::with_p(p)).unwrap();
            assert_eq!(r.value, 0.5);
            assert!(r.flags.exact);
        }
        assert!(gw_exact_dirac(&real(vec![0.5, 0.5], vec![vec![0.0; 2]; 2]), &real(vec![0.5, 0.5], vec![vec![0.0; 2]; 2]), Exponent::ONE).is_err());
    }

    #[test]
    fn deterministic_across_runs() {
        let x = real(vec![0.25; 4], (0..4).map(|i| (0..4).map(|j| ((i * 7 + j * 3) % 5) as f64).collect()).collect());
        let y = real(vec![0.2; 5], (0..5).map(|i| (0..5).map(|j| ((i * 2 + j * 5) % 7) as f64 * 0.5).collect()).collect());
        let config = SolveConfig { seed: 17, ..SolveConfig::default() };
        let a = solve_gw(&x, &y, &config).unwrap();
        let b = solve_gw(&x, &y, &config).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.coupling, b.coupling);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn size_cap_and_mismatch() {
        let x = real(vec![0.5, 0.5], vec![vec![0.0; 2]; 2]);
        let config = SolveConfig { size_cap: 1, ..SolveConfig::default() };
        assert!(matches!(solve_gw(&x, &x, &config), Err(Error::SizeCap { size: 2, cap: 1 })));
        let y = ZNetwork::one_point(SpaceDescriptor::LambdaInf, MetricPoint::Scalar(0.0)).unwrap();
        assert!(matches!(solve_gw(&x, &y, &SolveConfig::default()), Err(Error::IncompatibleSpaces)));
    }

    #[test]
    fn value_matches_reported_coupling() {
        let x = real(vec![0.1, 0.4, 0.5], vec![vec![0.0, 2.0, 1.0], vec![2.0, 0.0, 0.5], vec![1.0, 0.5, 0.0]]);
        let y = real(vec![0.5, 0.5], vec![vec![0.0, 1.5], vec![1.5, 0.0]]);
        let r = solve_gw(&x, &y, &SolveConfig::default()).unwrap();
        let d = crate::gw::distortion(&x, &y, &r.coupling, Exponent::TWO).unwrap();
        assert!((r.value - d / 2.0).abs() < 1e-12);
    }
}
