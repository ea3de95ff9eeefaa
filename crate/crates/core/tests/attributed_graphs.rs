use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zgw_core::gw::distortion;
use zgw_core::matrix::Matrix;
use zgw_core::network::{from_attributed_graph_fused, from_edge_attributed_cone, AttributedGraph, FusedParams};
use zgw_core::sampling::{random_coupling, random_point, random_weights};
use zgw_core::{Exponent, MetricPoint, SpaceDescriptor};

fn graph(rng: &mut ChaCha8Rng, n: usize) -> AttributedGraph {
    let node_space = SpaceDescriptor::Discrete { alphabet: vec!["C".into(), "N".into(), "O".into()] };
    let edge_space = SpaceDescriptor::EuclideanLr { n: 2, r: Exponent::ONE };
    let features = (0..n).map(|_| random_point(&node_space, rng)).collect();
    let phi = Matrix::from_fn(n, n, |i, j| if i != j && rng.gen_bool(0.5) { rng.gen_range(0.5..1.5) } else { 0.0 });
    let edges = Matrix::from_fn(n, n, |i, j| (phi[(i, j)] > 0.0).then(|| random_point(&edge_space, rng)));
    AttributedGraph::new(node_space, edge_space, features, phi, edges, random_weights(n, rng)).unwrap()
}

proptest! {
    #[test]
    fn graphs_round_trip_through_json(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = graph(&mut rng, n);
        let back = AttributedGraph::from_json(&g.to_json()).unwrap();
        prop_assert_eq!(back, g);
    }

    /// With all weight on `φ`, the flattened distortion is the standard GW
    /// distortion of the `φ` matrices.
    #[test]
    fn structure_only_flattening_is_standard_gw(seed in any::<u64>(), n in 1usize..5, m in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, h) = (graph(&mut rng, n), graph(&mut rng, m));
        let fill = MetricPoint::Vector(vec![0.0, 0.0]);
        let params = FusedParams::new(0.0, 1.0, 2.0).unwrap();
        let (fg, fh) = (from_attributed_graph_fused(&g, params, &fill).unwrap(), from_attributed_graph_fused(&h, params, &fill).unwrap());
        let pi = random_coupling(g.weights(), h.weights(), &mut rng);
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..m {
                for k in 0..n {
                    for l in 0..m {
                        total += pi.get(i, j) * pi.get(k, l) * (g.phi()[(i, k)] - h.phi()[(j, l)]).powi(2);
                    }
                }
            }
        }
        let flat = distortion(&fg, &fh, &pi, Exponent::TWO).unwrap();
        prop_assert!((flat - total.sqrt()).abs() <= 1e-12);
    }
}

#[test]
fn cone_encoding_puts_non_edges_at_the_apex() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = graph(&mut rng, 5);
    let net = from_edge_attributed_cone(&g, None).unwrap();
    let space = net.space();
    let apex = MetricPoint::cone(MetricPoint::Vector(vec![9.0, 9.0]), 0.0);
    for i in 0..5 {
        for j in 0..5 {
            let d = space.distance(net.omega(i, j), &apex).unwrap();
            // The distance to the apex is the radius, which is φ on edges and zero elsewhere.
            assert!((d - g.phi()[(i, j)]).abs() < 1e-15);
        }
    }
}

#[test]
fn edgeless_graphs_need_a_default_base() {
    let space = SpaceDescriptor::Real;
    let g = AttributedGraph::new(
        space.clone(),
        space,
        vec![MetricPoint::Scalar(0.0)],
        Matrix::filled(1, 1, 0.0),
        Matrix::filled(1, 1, None),
        vec![1.0],
    )
    .unwrap();
    assert!(from_edge_attributed_cone(&g, None).is_err());
    assert!(from_edge_attributed_cone(&g, Some(&MetricPoint::Scalar(1.0))).is_ok());
}

#[test]
fn fused_parameters_are_validated() {
    assert!(FusedParams::new(0.7, 0.5, 1.0).is_err());
    assert!(FusedParams::new(0.2, 0.2, 0.5).is_err());
    assert!(FusedParams::new(-0.1, 0.2, 1.0).is_err());
    assert!(FusedParams::new(0.0, 0.0, 1.0).is_ok());
}
