//! Distance metrics between two network graphs over a common boundary.
//!
//! Interior vertex names carry no meaning across graphs, so comparison
//! works through what is observable from the boundary: each edge is
//! described by the set of ordered boundary pairs whose path crosses it
//! (its signature), edges with equal signatures form an equivalence
//! class, and a class is matched in the other graph by the edges lying on
//! exactly the same pairs' paths there. The weighted metric accumulates
//! class weight differences; the topological variants score only whether
//! a class has any counterpart.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::netgraph::{EdgeId, GraphError, PartialNetworkGraph, VertexId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("graphs have different boundary sets")]
    BoundaryMismatch,
    #[error("no weighted equivalence classes to compare against")]
    ZeroDenominator,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An edge together with the ordered boundary pairs routing through it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSignature {
    pub edge: EdgeId,
    pub pairs: BTreeSet<(VertexId, VertexId)>,
}

/// Signature of every edge lying on at least one path, in edge order.
/// Edges on no path are invisible from the boundary and excluded.
pub fn edge_signatures(graph: &PartialNetworkGraph) -> Vec<EdgeSignature> {
    let mut pairs_of: BTreeMap<EdgeId, BTreeSet<(VertexId, VertexId)>> = BTreeMap::new();
    for (u, v) in graph.ordered_pairs() {
        for e in graph.path(&u, &v).expect("ordered pair has a path") {
            pairs_of
                .entry(e.clone())
                .or_default()
                .insert((u.clone(), v.clone()));
        }
    }
    graph
        .edge_order()
        .into_iter()
        .filter_map(|edge| {
            pairs_of.remove(&edge).map(|pairs| EdgeSignature { edge, pairs })
        })
        .collect()
}

/// Equivalence classes of [`edge_signatures`]: every distinct signature
/// with its member edges, ordered by signature.
pub fn equivalence_classes(
    graph: &PartialNetworkGraph,
) -> Vec<(BTreeSet<(VertexId, VertexId)>, BTreeSet<EdgeId>)> {
    let mut classes: BTreeMap<BTreeSet<(VertexId, VertexId)>, BTreeSet<EdgeId>> =
        BTreeMap::new();
    for sig in edge_signatures(graph) {
        classes.entry(sig.pairs).or_default().insert(sig.edge);
    }
    classes.into_iter().collect()
}

/// Edges of `other` equivalent to an edge with the given signature: those
/// on every path of the signature's pairs and on no other pair's path.
/// May be empty. Requires equal boundary sets.
pub fn matching_edge_set(
    pairs: &BTreeSet<(VertexId, VertexId)>,
    source: &PartialNetworkGraph,
    other: &PartialNetworkGraph,
) -> Result<BTreeSet<EdgeId>, MetricError> {
    let b1: BTreeSet<&VertexId> = source.boundary().iter().collect();
    let b2: BTreeSet<&VertexId> = other.boundary().iter().collect();
    if b1 != b2 {
        return Err(MetricError::BoundaryMismatch);
    }
    let mut matched: Option<BTreeSet<EdgeId>> = None;
    for (u, v) in pairs {
        let on_path: BTreeSet<EdgeId> = match other.path(u, v) {
            Some(chain) => chain.iter().cloned().collect(),
            None => BTreeSet::new(),
        };
        matched = Some(match matched {
            None => on_path,
            Some(prev) => prev.intersection(&on_path).cloned().collect(),
        });
    }
    let mut matched = matched.unwrap_or_default();
    for (u, v) in other.ordered_pairs() {
        if pairs.contains(&(u.clone(), v.clone())) {
            continue;
        }
        for e in other.path(&u, &v).expect("ordered pair has a path") {
            matched.remove(e);
        }
    }
    Ok(matched)
}

fn sum_weights(graph: &PartialNetworkGraph, set: &BTreeSet<EdgeId>) -> f64 {
    set.iter()
        .map(|e| graph.weight(e).expect("edge from this graph"))
        .sum()
}

/// Weighted path-intersection distance from `graph` to `other`.
///
/// Sums |w(class) − w_other(match)| over the equivalence classes of
/// `graph` and divides by the summed class weights; `weight` and
/// `weight_other` score edge subsets of their respective graphs (the
/// empty set must score 0). [`sum_weights`] semantics are the default
/// choice via [`q_metric_default`].
pub fn q_metric(
    graph: &PartialNetworkGraph,
    other: &PartialNetworkGraph,
    weight: impl Fn(&PartialNetworkGraph, &BTreeSet<EdgeId>) -> f64,
    weight_other: impl Fn(&PartialNetworkGraph, &BTreeSet<EdgeId>) -> f64,
) -> Result<f64, MetricError> {
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (pairs, members) in equivalence_classes(graph) {
        let matched = matching_edge_set(&pairs, graph, other)?;
        let w = weight(graph, &members);
        let w_other = weight_other(other, &matched);
        numerator += (w - w_other).abs();
        denominator += w;
    }
    if denominator <= 0.0 {
        return Err(MetricError::ZeroDenominator);
    }
    Ok(numerator / denominator)
}

/// [`q_metric`] with both weight functions summing member edge weights.
pub fn q_metric_default(
    graph: &PartialNetworkGraph,
    other: &PartialNetworkGraph,
) -> Result<f64, MetricError> {
    q_metric(graph, other, sum_weights, sum_weights)
}

/// Topological distances (tm1, tm2): the weight fraction and the count
/// fraction of `graph`'s equivalence classes with no equivalent edge in
/// `other`. A nonempty match scores zero regardless of its weights.
pub fn tm_metrics(
    graph: &PartialNetworkGraph,
    other: &PartialNetworkGraph,
) -> Result<(f64, f64), MetricError> {
    tm_metrics_over(graph, other, |_| true)
}

/// [`tm_metrics`] restricted to classes containing at least one of the
/// given edges (e.g. the lossy edges actually observable in
/// measurements).
pub fn tm_metrics_restricted(
    graph: &PartialNetworkGraph,
    other: &PartialNetworkGraph,
    keep: &BTreeSet<EdgeId>,
) -> Result<(f64, f64), MetricError> {
    tm_metrics_over(graph, other, |members| !members.is_disjoint(keep))
}

fn tm_metrics_over(
    graph: &PartialNetworkGraph,
    other: &PartialNetworkGraph,
    include: impl Fn(&BTreeSet<EdgeId>) -> bool,
) -> Result<(f64, f64), MetricError> {
    let mut unmatched_weight = 0.0;
    let mut total_weight = 0.0;
    let mut unmatched = 0usize;
    let mut total = 0usize;
    for (pairs, members) in equivalence_classes(graph) {
        if !include(&members) {
            continue;
        }
        let matched = matching_edge_set(&pairs, graph, other)?;
        let w = sum_weights(graph, &members);
        total_weight += w;
        total += 1;
        if matched.is_empty() {
            unmatched_weight += w;
            unmatched += 1;
        }
    }
    if total == 0 || total_weight <= 0.0 {
        return Err(MetricError::ZeroDenominator);
    }
    Ok((
        unmatched_weight / total_weight,
        unmatched as f64 / total as f64,
    ))
}
