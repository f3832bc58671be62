//! Fixtures shared by the integration test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;

use netomo_core::consistency::TreeCollection;
use netomo_core::netgraph::{
    build_partial_graph, Edge, Orientation, PartialNetworkGraph, Tree, VertexId,
};
use netomo_core::simulate::{random_network, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Hub-and-spoke graph over four boundary vertices; all four crossing
/// paths weigh 20.
pub fn hub_graph() -> PartialNetworkGraph {
    let vertices = ["b1", "b2", "b3", "b4", "c"].map(String::from).to_vec();
    let edges = vec![
        (Edge::new("w1", "b1", "c"), 10.0),
        (Edge::new("w2", "b2", "c"), 10.0),
        (Edge::new("w3", "c", "b3"), 10.0),
        (Edge::new("w4", "c", "b4"), 10.0),
    ];
    let boundary = ["b1", "b2", "b3", "b4"].map(String::from).to_vec();
    let paths = vec![
        (("b1".into(), "b3".into()), vec!["w1".into(), "w3".into()]),
        (("b1".into(), "b4".into()), vec!["w1".into(), "w4".into()]),
        (("b2".into(), "b3".into()), vec!["w2".into(), "w3".into()]),
        (("b2".into(), "b4".into()), vec!["w2".into(), "w4".into()]),
    ];
    build_partial_graph(vertices, edges, boundary, paths).unwrap()
}

/// The same four crossing paths as [`hub_graph`], each routed through a
/// dedicated light middle edge, so path weights are 22, 21, 21, 22.
pub fn crossing_graph() -> PartialNetworkGraph {
    let vertices = ["b1", "b2", "b3", "b4", "c1", "c2", "d1", "d2"]
        .map(String::from)
        .to_vec();
    let edges = vec![
        (Edge::new("w1", "b1", "c1"), 10.0),
        (Edge::new("w2", "b2", "c2"), 10.0),
        (Edge::new("s1", "c1", "d1"), 2.0),
        (Edge::new("s2", "c1", "d2"), 1.0),
        (Edge::new("s3", "c2", "d1"), 1.0),
        (Edge::new("s4", "c2", "d2"), 2.0),
        (Edge::new("w3", "d1", "b3"), 10.0),
        (Edge::new("w4", "d2", "b4"), 10.0),
    ];
    let boundary = ["b1", "b2", "b3", "b4"].map(String::from).to_vec();
    let paths = vec![
        (
            ("b1".into(), "b3".into()),
            vec!["w1".into(), "s1".into(), "w3".into()],
        ),
        (
            ("b1".into(), "b4".into()),
            vec!["w1".into(), "s2".into(), "w4".into()],
        ),
        (
            ("b2".into(), "b3".into()),
            vec!["w2".into(), "s3".into(), "w3".into()],
        ),
        (
            ("b2".into(), "b4".into()),
            vec!["w2".into(), "s4".into(), "w4".into()],
        ),
    ];
    build_partial_graph(vertices, edges, boundary, paths).unwrap()
}

/// Six unit-weight trees of a 3-star network over boundary {a, b, c}: per
/// tree, edge "1" is the hub edge and "2", "3" serve the other boundary
/// vertices in alphabetical order. The first weight in canonical order
/// (hub edge of a's receiver tree) is nudged by `eps`.
pub fn star_collection(eps: f64) -> TreeCollection {
    let boundary: Vec<VertexId> = ["a", "b", "c"].map(String::from).to_vec();
    let mut trees = Vec::new();
    for root in ["a", "b", "c"] {
        let leaves: Vec<&str> = ["a", "b", "c"]
            .iter()
            .filter(|v| **v != root)
            .copied()
            .collect();
        for orientation in [Orientation::Receiver, Orientation::Source] {
            let hub = format!("h_{}_{}", orientation.as_str(), root);
            let edges = match orientation {
                Orientation::Receiver => vec![
                    Edge::new("1", hub.clone(), root),
                    Edge::new("2", leaves[0], hub.clone()),
                    Edge::new("3", leaves[1], hub.clone()),
                ],
                Orientation::Source => vec![
                    Edge::new("1", root, hub.clone()),
                    Edge::new("2", hub.clone(), leaves[0]),
                    Edge::new("3", hub.clone(), leaves[1]),
                ],
            };
            let weights: BTreeMap<String, f64> = [
                ("1".to_string(), 1.0),
                ("2".to_string(), 1.0),
                ("3".to_string(), 1.0),
            ]
            .into_iter()
            .collect();
            trees.push(Tree::new(root.to_string(), orientation, edges, weights).unwrap());
        }
    }
    let collection = TreeCollection::new(boundary, trees).unwrap();
    if eps == 0.0 {
        return collection;
    }
    let mut weights = collection.weight_vector();
    weights[0] += eps;
    collection.with_weight_vector(&weights).unwrap()
}

/// Closed-form adjusted weights of the perturbed 3-star: 1 + eps * c / 90.
pub const STAR_COEFF: [f64; 18] = [
    52.0, -19.0, -19.0, 4.0, -1.0, 5.0, 4.0, -1.0, 5.0, 2.0, 1.0, 1.0, 14.0, 19.0, -5.0, 14.0,
    19.0, -5.0,
];

/// Randomly weighted logical subgraph of a generated network.
pub fn weighted_logical(
    seed: u64,
    num_vertices: usize,
    degree: usize,
    num_boundary: usize,
    symmetric_routing: bool,
) -> PartialNetworkGraph {
    let config = SimConfig {
        num_vertices,
        degree,
        num_boundary,
        seed,
        symmetric_routing,
        ..SimConfig::default()
    };
    let net = random_network(&config).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let weights: Vec<f64> = net
        .graph
        .edge_order()
        .iter()
        .map(|_| rng.random_range(0.5..4.0))
        .collect();
    net.graph
        .with_weights(&weights)
        .unwrap()
        .logical_subgraph()
        .unwrap()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
