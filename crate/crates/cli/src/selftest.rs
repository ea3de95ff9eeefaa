//! Small seeded invariant suites behind `zgw selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use zgw_core::approximation::{kernel_values, landmark_fps, sandwich};
use zgw_core::bounds::bound_report;
use zgw_core::geometry::{mixture_holder_check, verify_geodesic, Carrier};
use zgw_core::gw::{distortion, gw_exact_dirac, solve_gw, SolveConfig};
use zgw_core::network::collapse_map;
use zgw_core::ot::Coupling;
use zgw_core::sampling::{
    geodesic_spaces, random_coupling, random_dirac_network, random_network, random_point, standard_spaces,
};
use zgw_core::{Exponent, Result};

const TOL: f64 = 1e-9;

#[derive(Default)]
struct Suite {
    checks: usize,
    failures: usize,
    first_failure: Option<String>,
}

impl Suite {
    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            self.first_failure.get_or_insert_with(describe);
        }
    }

    fn record(&mut self, outcome: Result<bool>, what: &str) {
        match outcome {
            Ok(ok) => self.check(ok, || what.to_string()),
            Err(e) => self.check(false, || format!("{what}: {e}")),
        }
    }
}

fn metric_axioms(rng: &mut ChaCha8Rng) -> Suite {
    let mut suite = Suite::default();
    for space in standard_spaces() {
        for _ in 0..30 {
            let (a, b, c) = (random_point(&space, rng), random_point(&space, rng), random_point(&space, rng));
            let d = |u, v| space.distance_unchecked(u, v);
            suite.check(d(&a, &a) == 0.0, || format!("{}: d(a, a) != 0", space.name()));
            suite.check(d(&a, &b) == d(&b, &a), || format!("{}: asymmetric distance", space.name()));
            let slack = TOL * (1.0 + d(&a, &c).abs());
            suite.check(d(&a, &c) <= d(&a, &b) + d(&b, &c) + slack, || format!("{}: triangle inequality", space.name()));
        }
    }
    suite
}

fn dirac_triangle(rng: &mut ChaCha8Rng) -> Suite {
    let mut suite = Suite::default();
    for space in standard_spaces() {
        for p in [Exponent::ONE, Exponent::TWO, Exponent::Infinite] {
            let nets: Vec<_> = (0..3).map(|_| random_dirac_network(&space, rng.gen_range(1..4), rng)).collect();
            let outcome = (|| {
                let g = |i: usize, j: usize| gw_exact_dirac(&nets[i], &nets[j], p).map(|r| r.value);
                Ok(g(0, 2)? <= g(0, 1)? + g(1, 2)? + TOL)
            })();
            suite.record(outcome, &format!("{}: GW triangle on Dirac networks", space.name()));
        }
    }
    suite
}

fn bound_hierarchy(rng: &mut ChaCha8Rng) -> Suite {
    let mut suite = Suite::default();
    let config = SolveConfig { restarts: 4, ..SolveConfig::default() };
    for space in standard_spaces() {
        let (x, y) = (random_network(&space, rng.gen_range(1..5), rng), random_network(&space, rng.gen_range(1..5), rng));
        let outcome = (|| {
            let bounds = bound_report(&x, &y, config.p, None)?;
            let solved = solve_gw(&x, &y, &config)?;
            Ok(bounds.ordering_violations.is_empty() && bounds.best() <= solved.value + TOL)
        })();
        suite.record(outcome, &format!("{}: bound hierarchy", space.name()));
    }
    suite
}

fn blow_up(rng: &mut ChaCha8Rng) -> Suite {
    let mut suite = Suite::default();
    for space in standard_spaces() {
        let net = random_network(&space, rng.gen_range(1..5), rng);
        let mult: Vec<usize> = (0..net.len()).map(|_| rng.gen_range(1..4)).collect();
        let outcome = (|| {
            let big = net.blow_up(&mult)?;
            let collapse = Coupling::from_map(&collapse_map(&mult)?, big.weights(), net.len())?;
            Ok(distortion(&big, &net, &collapse, Exponent::TWO)? <= TOL)
        })();
        suite.record(outcome, &format!("{}: blow-up collapses with zero distortion", space.name()));
    }
    suite
}

fn mixture_paths(rng: &mut ChaCha8Rng) -> Suite {
    let mut suite = Suite::default();
    for space in standard_spaces() {
        let (x, y) = (random_network(&space, 3, rng), random_network(&space, 2, rng));
        let pi = random_coupling(x.weights(), y.weights(), rng);
        let fill = random_point(&space, rng);
        let (s, t) = (rng.gen_range(0.0..0.5), rng.gen_range(0.5..1.0));
        let outcome = mixture_holder_check(&x, &y, &fill, &pi, Exponent::TWO, s, t).map(|h| h.holds(TOL));
        suite.record(outcome, &format!("{}: mixture Hölder estimate", space.name()));
    }
    suite
}

fn geodesics(rng: &mut ChaCha8Rng) -> Suite {
    let mut suite = Suite::default();
    for space in geodesic_spaces() {
        let (x, y) = (random_network(&space, 3, rng), random_network(&space, 3, rng));
        let pi = random_coupling(x.weights(), y.weights(), rng);
        let outcome = verify_geodesic(&x, &y, &pi, Exponent::TWO, &[0.0, 0.3, 0.7, 1.0], Carrier::default())
            .map(|r| r.max_identity_error() <= TOL);
        suite.record(outcome, &format!("{}: interpolation distortion identity", space.name()));
    }
    suite
}

fn sandwiches(rng: &mut ChaCha8Rng) -> Suite {
    let mut suite = Suite::default();
    for space in standard_spaces() {
        let (x, y) = (random_dirac_network(&space, 3, rng), random_dirac_network(&space, 2, rng));
        let outcome = (|| {
            let values = kernel_values(&[&x, &y]);
            let q = landmark_fps(&space, &values, 2.min(values.len()), 0)?;
            let r = sandwich(&x, &y, &q, Exponent::TWO, Exponent::Infinite, &SolveConfig::default())?;
            let exact = gw_exact_dirac(&x, &y, Exponent::TWO)?.value;
            Ok(r.lower <= exact + TOL && exact <= r.upper + TOL)
        })();
        suite.record(outcome, &format!("{}: sandwich brackets the exact value", space.name()));
    }
    suite
}

type SuiteFn = fn(&mut ChaCha8Rng) -> Suite;

/// Runs every suite; returns the JSON summary and whether all checks passed.
pub fn run_all(seed: u64) -> (Value, bool) {
    let suites: [(&str, SuiteFn); 7] = [
        ("metric_axioms", metric_axioms),
        ("dirac_triangle", dirac_triangle),
        ("bound_hierarchy", bound_hierarchy),
        ("blow_up", blow_up),
        ("mixture_paths", mixture_paths),
        ("geodesics", geodesics),
        ("sandwich", sandwiches),
    ];
    let mut passed = true;
    let summary: Vec<Value> = suites
        .iter()
        .enumerate()
        .map(|(k, (name, suite))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let s = suite(&mut rng);
            passed &= s.failures == 0;
            json!({
                "name": name,
                "checks": s.checks,
                "failures": s.failures,
                "first_failure": s.first_failure,
            })
        })
        .collect();
    (json!({ "suites": summary, "passed": passed }), passed)
}
