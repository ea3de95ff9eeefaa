use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zgw_core::bounds::bound_report;
use zgw_core::gw::{brute_force_gw, distortion, gw_exact_dirac, solve_gw, SolveConfig};
use zgw_core::matrix::Matrix;
use zgw_core::network::collapse_map;
use zgw_core::ot::{solve_ot_1d, Coupling};
use zgw_core::sampling::{random_dirac_network, random_network, random_weights, standard_spaces};
use zgw_core::{Error, Exponent, MetricPoint, SpaceDescriptor, ZNetwork};

const PS: [Exponent; 3] = [Exponent::ONE, Exponent::TWO, Exponent::Infinite];

fn config(p: Exponent) -> SolveConfig {
    SolveConfig { restarts: 3, ..SolveConfig::with_p(p) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn value_is_the_distortion_of_the_reported_coupling(index in 0usize..11, seed in any::<u64>(), pk in 0usize..3) {
        let space = &standard_spaces()[index];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (random_network(space, 4, &mut rng), random_network(space, 3, &mut rng));
        let r = solve_gw(&x, &y, &config(PS[pk])).unwrap();
        prop_assert!(r.coupling.marginal_residual() < 1e-9);
        let d = distortion(&x, &y, &r.coupling, PS[pk]).unwrap();
        prop_assert!((r.value - d / 2.0).abs() <= 1e-12 * d.max(1.0));
    }

    #[test]
    fn value_dominates_every_lower_bound(index in 0usize..11, seed in any::<u64>(), pk in 0usize..3) {
        let space = &standard_spaces()[index];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (random_network(space, 5, &mut rng), random_network(space, 4, &mut rng));
        let p = PS[pk];
        let r = solve_gw(&x, &y, &SolveConfig { verify_bounds: true, ..config(p) }).unwrap();
        prop_assert!(r.bound_violations.is_empty(), "{:?}", r.bound_violations);
        let b = bound_report(&x, &y, p, None).unwrap();
        prop_assert!(b.ordering_violations.is_empty());
        prop_assert!(b.best() <= r.value + 1e-9);
    }

    #[test]
    fn networks_are_at_distance_zero_from_themselves_and_blow_ups(index in 0usize..11, seed in any::<u64>()) {
        let space = &standard_spaces()[index];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_network(space, 4, &mut rng);
        let mult = [1, 3, 2, 1];
        let big = x.blow_up(&mult).unwrap();
        let collapse = Coupling::from_map(&collapse_map(&mult).unwrap(), big.weights(), 4).unwrap();
        for p in PS {
            prop_assert_eq!(solve_gw(&x, &x, &SolveConfig::supplied(p, Coupling::diagonal(x.weights()))).unwrap().value, 0.0);
            prop_assert!(solve_gw(&big, &x, &SolveConfig::supplied(p, collapse.clone())).unwrap().value <= 1e-12);
        }
    }

    #[test]
    fn dirac_values_are_exact_and_symmetric(index in 0usize..11, seed in any::<u64>(), pk in 0usize..3) {
        let space = &standard_spaces()[index];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (random_dirac_network(space, 3, &mut rng), random_network(space, 4, &mut rng));
        let p = PS[pk];
        let exact = gw_exact_dirac(&x, &y, p).unwrap();
        let back = gw_exact_dirac(&y, &x, p).unwrap();
        prop_assert!((exact.value - back.value).abs() <= 1e-12);
        let solved = solve_gw(&x, &y, &config(p)).unwrap();
        prop_assert!(solved.flags.exact);
        prop_assert!((solved.value - exact.value).abs() <= 1e-12);
    }

    /// The kernel `(x, x') ↦ 2x` turns GW into the Wasserstein distance of the weights.
    #[test]
    fn doubled_projection_kernels_realize_wasserstein(seed in any::<u64>(), n in 1usize..6, m in 1usize..6, pk in 0usize..2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = [1.0, 2.0][pk];
        let atoms = |k: usize, rng: &mut ChaCha8Rng| {
            let w = random_weights(k, rng);
            let s: Vec<f64> = (0..k).map(|_| rand::Rng::gen_range(rng, -2.0..2.0)).collect();
            (s, w)
        };
        let ((sa, wa), (sb, wb)) = (atoms(n, &mut rng), atoms(m, &mut rng));
        let net = |s: &[f64], w: &[f64]| {
            let k = s.len();
            ZNetwork::with_default_labels(SpaceDescriptor::Real, w.to_vec(), Matrix::from_fn(k, k, |i, _| MetricPoint::Scalar(2.0 * s[i]))).unwrap()
        };
        let gw = solve_gw(&net(&sa, &wa), &net(&sb, &wb), &config(Exponent::Finite(p))).unwrap().value;
        let ot = solve_ot_1d(&sa, &wa, &sb, &wb, p).unwrap();
        prop_assert!((gw - ot).abs() <= 1e-6, "{} vs {}", gw, ot);
    }
}

#[test]
fn matches_the_oracle_on_tiny_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for space in standard_spaces() {
        for p in [Exponent::ONE, Exponent::TWO] {
            let (x, y) = (random_network(&space, 2, &mut rng), random_network(&space, 3, &mut rng));
            let oracle = brute_force_gw(&x, &y, p, 400).unwrap().value;
            let solved = solve_gw(&x, &y, &SolveConfig::with_p(p)).unwrap().value;
            assert!((solved - oracle).abs() <= 5e-3, "{}: {solved} vs {oracle}", space.name());
            assert!(solved <= oracle + 1e-12, "{}: solver above the oracle grid", space.name());
        }
    }
}

#[test]
fn same_seed_same_answer() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let space = SpaceDescriptor::EuclideanLr { n: 2, r: Exponent::TWO };
    let (x, y) = (random_network(&space, 6, &mut rng), random_network(&space, 5, &mut rng));
    let cfg = SolveConfig { seed: 9, ..SolveConfig::default() };
    let (a, b) = (solve_gw(&x, &y, &cfg).unwrap(), solve_gw(&x, &y, &cfg).unwrap());
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.coupling.matrix().data(), b.coupling.matrix().data());
}

#[test]
fn errors_are_typed() {
    let x = ZNetwork::one_point(SpaceDescriptor::Real, MetricPoint::Scalar(0.0)).unwrap();
    let y = ZNetwork::one_point(SpaceDescriptor::LambdaInf, MetricPoint::Scalar(0.0)).unwrap();
    assert_eq!(solve_gw(&x, &y, &SolveConfig::default()).unwrap_err(), Error::IncompatibleSpaces);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let big = random_network(&SpaceDescriptor::Real, 5, &mut rng);
    let capped = SolveConfig { size_cap: 4, ..SolveConfig::default() };
    assert!(matches!(solve_gw(&big, &big, &capped), Err(Error::SizeCap { .. })));
}
