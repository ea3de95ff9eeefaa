use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zgw_core::approximation::{embed_rn, landmark_fps};
use zgw_core::sampling::{random_network, random_point, standard_spaces};
use zgw_core::{Exponent, MetricPoint, SpaceDescriptor, ZNetwork};

fn space_index() -> impl Strategy<Value = usize> {
    0..standard_spaces().len()
}

proptest! {
    #[test]
    fn distances_are_metrics(index in space_index(), seed in any::<u64>()) {
        let space = &standard_spaces()[index];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (random_point(space, &mut rng), random_point(space, &mut rng), random_point(space, &mut rng));
        let d = |u: &MetricPoint, v: &MetricPoint| space.distance(u, v).unwrap();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &b) >= 0.0);
        prop_assert!(d(&a, &c) <= (d(&a, &b) + d(&b, &c)) * (1.0 + 1e-9));
    }

    #[test]
    fn points_round_trip_through_json(index in space_index(), seed in any::<u64>()) {
        let space = &standard_spaces()[index];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = random_point(space, &mut rng);
        let back = space.point_from_json(&z.to_json()).unwrap();
        prop_assert_eq!(space.distance(&z, &back).unwrap(), 0.0);
    }

    #[test]
    fn networks_round_trip_through_json(index in space_index(), seed in any::<u64>(), n in 1usize..5) {
        let space = &standard_spaces()[index];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(space, n, &mut rng);
        let text = zgw_core::json::to_canonical_string(&net.to_json());
        let back = ZNetwork::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back.weights(), net.weights());
        prop_assert_eq!(back.labels(), net.labels());
        for i in 0..n {
            for k in 0..n {
                prop_assert_eq!(space.distance(back.omega(i, k), net.omega(i, k)).unwrap(), 0.0);
            }
        }
    }

    /// Each coordinate `d(·, q)` is 1-Lipschitz, so the ℓ∞ embedding never stretches distances.
    #[test]
    fn landmark_embedding_is_contracting_in_sup_norm(index in space_index(), seed in any::<u64>(), k in 1usize..5) {
        let space = &standard_spaces()[index];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(space, 3, &mut rng);
        let values: Vec<MetricPoint> = net.kernel().data().to_vec();
        let q = landmark_fps(space, &values, k.min(values.len()), seed).unwrap();
        let embedded = embed_rn(&net, &q, Exponent::Infinite).unwrap();
        let target = embedded.space();
        for a in 0..9 {
            for b in 0..9 {
                let (ia, ka, ib, kb) = (a / 3, a % 3, b / 3, b % 3);
                let original = space.distance(net.omega(ia, ka), net.omega(ib, kb)).unwrap();
                let image = target.distance(embedded.omega(ia, ka), embedded.omega(ib, kb)).unwrap();
                prop_assert!(image <= original * (1.0 + 1e-12) + 1e-15);
            }
        }
    }
}

#[test]
fn closed_form_distances() {
    let s = MetricPoint::Scalar;
    assert_eq!(SpaceDescriptor::LambdaInf.distance(&s(1.0), &s(3.0)).unwrap(), 3.0);
    assert_eq!(SpaceDescriptor::LambdaInf.distance(&s(2.0), &s(2.0)).unwrap(), 0.0);
    let snowflake = SpaceDescriptor::LambdaQ { q: 2.0 };
    assert!((snowflake.distance(&s(3.0), &s(4.0)).unwrap() - 7f64.sqrt()).abs() < 1e-15);
    let l1 = SpaceDescriptor::EuclideanLr { n: 2, r: Exponent::ONE };
    let v = |a: f64, b: f64| MetricPoint::Vector(vec![a, b]);
    assert_eq!(l1.distance(&v(0.0, 0.0), &v(1.0, -2.0)).unwrap(), 3.0);
    let cone = SpaceDescriptor::Cone { base: Box::new(SpaceDescriptor::Real) };
    let apex_a = MetricPoint::cone(s(0.0), 0.0);
    let apex_b = MetricPoint::cone(s(5.0), 0.0);
    assert_eq!(cone.distance(&apex_a, &apex_b).unwrap(), 0.0);
    assert!((cone.distance(&apex_a, &MetricPoint::cone(s(1.0), 2.0)).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn mismatched_points_are_rejected() {
    let real = SpaceDescriptor::Real;
    assert!(real.distance(&MetricPoint::Scalar(0.0), &MetricPoint::label("a")).is_err());
    let l2 = SpaceDescriptor::EuclideanLr { n: 3, r: Exponent::TWO };
    assert!(l2.distance(&MetricPoint::Vector(vec![0.0; 3]), &MetricPoint::Vector(vec![0.0; 2])).is_err());
}
