//! Built-in worked examples with known closed-form answers.
//!
//! Each check rebuilds a small fixture, runs one part of the library and
//! compares against values that can be verified by hand. `netomo selftest`
//! prints one line per check and fails if any of them does.

use std::collections::BTreeMap;

use netomo_core::consistency::{
    extrinsic_adjust, incidence_matrix, intrinsic_adjust, signed_incidence, TargetWeights,
    TreeCollection,
};
use netomo_core::evalmetric::tm_metrics;
use netomo_core::fusion::fuse_network;
use netomo_core::linsolve::{qr_row_reduce, LinError};
use netomo_core::netgraph::{
    build_partial_graph, Edge, Orientation, PartialNetworkGraph, Tree, VertexId,
};
use netomo_core::pruning::redistribute_after_prune;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn ok(name: &'static str, detail: String) -> Check {
        Check {
            name,
            passed: true,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> Check {
        Check {
            name,
            passed: false,
            detail,
        }
    }
}

/// Hub-and-spoke graph over four boundary vertices: two 10-weight in-edges,
/// two 10-weight out-edges, four crossing paths of weight 20.
fn hub_graph() -> PartialNetworkGraph {
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

/// The same four crossing paths, each routed through a dedicated light
/// middle edge (weights 2, 1, 1, 2), so path weights are 22, 21, 21, 22.
fn crossing_graph() -> PartialNetworkGraph {
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

/// Six unit-weight trees of a 3-star network over boundary {a, b, c},
/// with the first weight (hub edge of a's receiver tree) nudged by `eps`.
fn star_collection(eps: f64) -> TreeCollection {
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

/// Unmeetable targets on the hub graph: the paths satisfy
/// W(b1,b3) + W(b2,b4) = W(b1,b4) + W(b2,b3), the targets do not, so the
/// plain linear solve must flag the inconsistency and the least-squares
/// reweighting must spread the average target evenly over the hub edges.
fn check_inconsistent_targets() -> Check {
    const NAME: &str = "inconsistent targets get a best fit";
    let g = hub_graph();
    let pairs = [("b1", "b3", 22.0), ("b1", "b4", 21.0), ("b2", "b3", 21.0), ("b2", "b4", 22.0)];
    let (a, order, _) = incidence_matrix(&g);
    let z: Vec<f64> = order
        .iter()
        .map(|(u, v)| {
            pairs
                .iter()
                .find(|(pu, pv, _)| pu == u && pv == v)
                .map(|(_, _, w)| *w)
                .unwrap_or(f64::NAN)
        })
        .collect();
    if z.iter().any(|v| v.is_nan()) {
        return Check::fail(NAME, "fixture paths changed".into());
    }
    match qr_row_reduce(&a, &z) {
        Err(LinError::InconsistentSystem(_)) => {}
        other => {
            return Check::fail(
                NAME,
                format!("expected the exact solve to report inconsistency, got {other:?}"),
            )
        }
    }
    let target_list: Vec<((String, String), f64)> = pairs
        .iter()
        .map(|(u, v, w)| ((u.to_string(), v.to_string()), *w))
        .collect();
    let targets = TargetWeights::new(target_list, false).unwrap();
    let res = match extrinsic_adjust(&g, &targets) {
        Ok(r) => r,
        Err(e) => return Check::fail(NAME, format!("adjustment failed: {e}")),
    };
    let worst = res
        .weights
        .iter()
        .map(|w| (w - 10.75).abs())
        .fold(0.0_f64, f64::max);
    if worst > 1e-9 {
        return Check::fail(
            NAME,
            format!("expected every weight 10.75, worst deviation {worst:.2e}"),
        );
    }
    if (res.residual - 1.0).abs() > 1e-9 {
        return Check::fail(NAME, format!("expected residual 1, got {}", res.residual));
    }
    Check::ok(NAME, format!("all weights 10.75, residual {:.3}", res.residual))
}

/// The projection for the perturbed 3-star has the closed form
/// w_k = 1 + eps * c_k / 90 with integer coefficients c, linear in eps,
/// and the pair-comparison Gram matrix has smallest eigenvalue 2.
fn check_star_adjustment() -> Check {
    const NAME: &str = "3-star adjustment matches its closed form";
    let coeff = [
        52.0, -19.0, -19.0, 4.0, -1.0, 5.0, 4.0, -1.0, 5.0, 2.0, 1.0, 1.0, 14.0, 19.0, -5.0, 14.0,
        19.0, -5.0,
    ];
    for eps in [0.1, 1.0] {
        let trees = star_collection(eps);
        let res = match intrinsic_adjust(&trees) {
            Ok(r) => r,
            Err(e) => return Check::fail(NAME, format!("adjustment failed: {e}")),
        };
        for (k, (got, c)) in res.weights.iter().zip(coeff).enumerate() {
            let want = 1.0 + eps * c / 90.0;
            if (got - want).abs() > 1e-9 {
                return Check::fail(
                    NAME,
                    format!("eps {eps}: weight {k} is {got}, expected {want}"),
                );
            }
        }
        let bound = res.bound.unwrap_or(f64::INFINITY);
        if res.adjustment_norm * res.adjustment_norm > bound + 1e-12 {
            return Check::fail(NAME, format!("eps {eps}: bound {bound} violated"));
        }
    }
    let a = signed_incidence(&star_collection(0.0));
    let gram = a.gram_rows();
    let lambda = match netomo_core::linsolve::smallest_eigenvalue(&gram) {
        Ok(l) => l,
        Err(e) => return Check::fail(NAME, format!("eigenvalue solve failed: {e}")),
    };
    if (lambda - 2.0).abs() > 1e-9 {
        return Check::fail(NAME, format!("expected smallest eigenvalue 2, got {lambda}"));
    }
    Check::ok(NAME, "closed form holds for eps 0.1 and 1, eigenvalue 2".into())
}

/// A source tree (interior at distance 5 of 9) and a receiver tree
/// (interior at distance 3 of 9) over the same pair interleave into the
/// chain (3, 2, 4); pruning the 2-weight middle edge must keep the path
/// weight 9 by raising the survivors to (4, 5).
fn check_chain_merge_and_prune() -> Check {
    const NAME: &str = "two trees merge into a chain and prune cleanly";
    let source = Tree::new(
        "b1".to_string(),
        Orientation::Source,
        vec![Edge::new("1", "b1", "c"), Edge::new("2", "c", "b2")],
        [("1".to_string(), 5.0), ("2".to_string(), 4.0)]
            .into_iter()
            .collect(),
    )
    .unwrap();
    let receiver = Tree::new(
        "b2".to_string(),
        Orientation::Receiver,
        vec![Edge::new("1", "cp", "b2"), Edge::new("2", "b1", "cp")],
        [("1".to_string(), 6.0), ("2".to_string(), 3.0)]
            .into_iter()
            .collect(),
    )
    .unwrap();
    let trees = TreeCollection::new(
        vec!["b1".to_string(), "b2".to_string()],
        vec![source, receiver],
    )
    .unwrap();
    let fused = match fuse_network(&trees, 0.5) {
        Ok(f) => f,
        Err(e) => return Check::fail(NAME, format!("fusion failed: {e}")),
    };
    let chain: Vec<String> = match fused.graph.path("b1", "b2") {
        Some(p) => p.to_vec(),
        None => return Check::fail(NAME, "fused graph lost the path".into()),
    };
    let weights: Vec<f64> = chain
        .iter()
        .map(|e| fused.graph.weights()[e])
        .collect();
    let expect = [3.0, 2.0, 4.0];
    if weights.len() != 3 || weights.iter().zip(expect).any(|(w, e)| (w - e).abs() > 1e-9) {
        return Check::fail(NAME, format!("expected chain weights [3, 2, 4], got {weights:?}"));
    }
    let pruned = match redistribute_after_prune(&fused.graph, &[chain[1].clone()], None) {
        Ok(p) => p,
        Err(e) => return Check::fail(NAME, format!("pruning failed: {e}")),
    };
    let total = match pruned.graph.path_weight("b1", "b2") {
        Ok(t) => t,
        Err(e) => return Check::fail(NAME, format!("pruned graph lost the path: {e}")),
    };
    if (total - 9.0).abs() > 1e-9 || pruned.residual > 1e-9 {
        return Check::fail(
            NAME,
            format!("path weight {total} (want 9), residual {}", pruned.residual),
        );
    }
    let survivors: Vec<f64> = pruned
        .graph
        .path("b1", "b2")
        .unwrap()
        .iter()
        .map(|e| pruned.graph.weights()[e])
        .collect();
    if survivors.len() != 2
        || (survivors[0] - 4.0).abs() > 1e-9
        || (survivors[1] - 5.0).abs() > 1e-9
    {
        return Check::fail(NAME, format!("expected survivor weights [4, 5], got {survivors:?}"));
    }
    Check::ok(NAME, "chain (3, 2, 4) pruned to (4, 5) at path weight 9".into())
}

/// Comparing the crossing graph with its hub contraction: the four long
/// edges match (their light middle edges are below everything else), the
/// four light edges find no counterpart. By weight that is 6 of 46, by
/// class count 4 of 8.
fn check_metric_goldens() -> Check {
    const NAME: &str = "topology metrics hit their hand-computed values";
    let full = crossing_graph();
    let hub = hub_graph();
    let (tm1, tm2) = match tm_metrics(&full, &hub) {
        Ok(t) => t,
        Err(e) => return Check::fail(NAME, format!("metric failed: {e}")),
    };
    if (tm1 - 6.0 / 46.0).abs() > 1e-12 || (tm2 - 0.5).abs() > 1e-12 {
        return Check::fail(NAME, format!("expected (6/46, 0.5), got ({tm1}, {tm2})"));
    }
    let (self1, self2) = match tm_metrics(&full, &full) {
        Ok(t) => t,
        Err(e) => return Check::fail(NAME, format!("self comparison failed: {e}")),
    };
    if self1 != 0.0 || self2 != 0.0 {
        return Check::fail(NAME, format!("self comparison gave ({self1}, {self2})"));
    }
    Check::ok(NAME, format!("mismatch weight {tm1:.4}, mismatch count {tm2}"))
}

pub fn run_all() -> Vec<Check> {
    vec![
        check_inconsistent_targets(),
        check_star_adjustment(),
        check_chain_merge_and_prune(),
        check_metric_goldens(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        for check in run_all() {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
    }
}
