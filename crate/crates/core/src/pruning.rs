//! Edge pruning with weight redistribution that preserves end-to-end path
//! weights.
//!
//! Pruning an edge contracts it: the endpoints become one vertex and the
//! edge's weight is redistributed over the surviving edges by minimum-norm
//! least squares, so every pair's path weight is preserved exactly whenever
//! the reduced system still spans the original path weights.
//!
//! [`is_safe_prune`] detects edges whose removal provably keeps the system
//! consistent: the edge is strictly lighter than every sibling leaving its
//! non-boundary tail, or strictly lighter than every sibling entering its
//! non-boundary head.
//!
//! Two selection policies are provided: a pruning factor chosen from the
//! discontinuity structure of the pruned-density curve
//! ([`select_pruning_factor`]) and a squared-weight budget
//! ([`prune_by_budget`]).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::consistency::{enforce_positivity, ConsistencyError, PositivityMethod};
use crate::linsolve::{self, min_norm_least_squares, LinError, Matrix};
use crate::netgraph::{
    build_partial_graph_relaxed, Edge, EdgeId, GraphError, PartialNetworkGraph, VertexId,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PruneError {
    #[error("prune set references unknown edge `{0}`")]
    UnknownEdge(EdgeId),
    #[error("pruning removes every edge of the path ({0}, {1})")]
    PathVanishes(VertexId, VertexId),
    #[error("contraction merges the endpoints of path ({0}, {1}) while edges remain")]
    EndpointsMerged(VertexId, VertexId),
    #[error("contraction turns surviving edge `{0}` into a loop; include it in the prune set")]
    LoopCreated(EdgeId),
    #[error("graph has no edges")]
    NoEdges,
    #[error(transparent)]
    Consistency(#[from] ConsistencyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Lin(#[from] LinError),
}

/// Outcome of a prune-and-redistribute step.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneResult {
    /// Graph with the pruned edges contracted and redistributed weights
    /// applied.
    pub graph: PartialNetworkGraph,
    /// Final weights in the pruned graph's canonical edge order.
    pub weights: Vec<f64>,
    /// `||A_pruned w - z||_2` where z holds the original path weights; zero
    /// when redistribution preserves every path exactly.
    pub residual: f64,
    /// Pruned edges with the weight they carried.
    pub pruned: Vec<(EdgeId, f64)>,
    /// Entries the raw redistribution drove negative, as (edge id, raw
    /// value), before the positivity pass or clamping.
    pub negative_entries: Vec<(EdgeId, f64)>,
}

/// Union-find keyed by vertex id. The representative of a class is its
/// boundary member when it has one (so boundary names survive merging
/// with interior vertices), otherwise its lexicographically smallest
/// member.
#[derive(Clone)]
struct Contraction {
    parent: BTreeMap<VertexId, VertexId>,
    boundary: BTreeSet<VertexId>,
}

impl Contraction {
    fn new(boundary: BTreeSet<VertexId>) -> Self {
        Contraction {
            parent: BTreeMap::new(),
            boundary,
        }
    }

    fn find(&mut self, v: &VertexId) -> VertexId {
        let p = match self.parent.get(v) {
            None => return v.clone(),
            Some(p) => p.clone(),
        };
        let root = self.find(&p);
        if root != p {
            self.parent.insert(v.clone(), root.clone());
        }
        root
    }

    fn union(&mut self, a: &VertexId, b: &VertexId) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        let rank = |v: &VertexId| (!self.boundary.contains(v), v.clone());
        let (keep, absorb) = if rank(&ra) <= rank(&rb) {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent.insert(absorb, keep);
    }
}

/// Contracts the pruned edges and redistributes their weight over the
/// survivors so path weights are preserved in the least-squares sense.
///
/// The correction added to the survivor weights is the minimum-norm
/// solution of the reduced path system; when that system is consistent
/// every path weight is preserved exactly and the residual is zero.
///
/// Contraction keeps a boundary member's name when a merged class has
/// one, otherwise the lexicographically smallest vertex id; the merged
/// vertex is boundary if any member was.
///
/// When redistribution drives weights negative, `positivity` selects the
/// repair; with `None`, negative entries are clamped to zero (and reported
/// in `negative_entries`).
pub fn redistribute_after_prune(
    graph: &PartialNetworkGraph,
    prune_set: &[EdgeId],
    positivity: Option<PositivityMethod>,
) -> Result<PruneResult, PruneError> {
    let prune: BTreeSet<&EdgeId> = prune_set.iter().collect();
    for id in &prune {
        if graph.edge(id).is_none() {
            return Err(PruneError::UnknownEdge((*id).clone()));
        }
    }
    if prune.is_empty() {
        let weights = graph
            .edge_order()
            .iter()
            .map(|e| graph.weights()[e])
            .collect();
        return Ok(PruneResult {
            graph: graph.clone(),
            weights,
            residual: 0.0,
            pruned: Vec::new(),
            negative_entries: Vec::new(),
        });
    }

    let survivors: Vec<EdgeId> = graph
        .edge_order()
        .into_iter()
        .filter(|e| !prune.contains(e))
        .collect();
    let col: BTreeMap<&EdgeId, usize> = survivors.iter().zip(0..).collect();
    let pairs = graph.ordered_pairs();

    // Reduced path system over the survivors; targets are the original
    // path weights.
    let mut a = Matrix::zeros(pairs.len(), survivors.len());
    let mut z = Vec::with_capacity(pairs.len());
    for (r, (u, v)) in pairs.iter().enumerate() {
        let chain = graph.path(u, v).expect("pair comes from the graph");
        let mut any = false;
        for eid in chain {
            if let Some(&c) = col.get(eid) {
                a[(r, c)] = 1.0;
                any = true;
            }
        }
        if !any {
            return Err(PruneError::PathVanishes(u.clone(), v.clone()));
        }
        z.push(graph.path_weight(u, v)?);
    }

    let w_s: Vec<f64> = survivors.iter().map(|e| graph.weights()[e]).collect();
    let gap: Vec<f64> = z
        .iter()
        .zip(a.matvec(&w_s))
        .map(|(t, c)| t - c)
        .collect();
    let delta = min_norm_least_squares(&a, &gap)?;
    let raw: Vec<f64> = w_s.iter().zip(&delta).map(|(w, d)| w + d).collect();

    let negative_entries: Vec<(EdgeId, f64)> = raw
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < 0.0)
        .map(|(i, &v)| (survivors[i].clone(), v))
        .collect();
    let weights: Vec<f64> = if negative_entries.is_empty() {
        raw
    } else {
        match positivity {
            Some(method) => enforce_positivity(&a, &w_s, &z, method)?
                .iter()
                .map(|&v| v.max(0.0))
                .collect(),
            None => raw.iter().map(|&v| v.max(0.0)).collect(),
        }
    };
    let fit = a.matvec(&weights);
    let residual = linsolve::norm2(
        &fit.iter().zip(&z).map(|(f, t)| f - t).collect::<Vec<_>>(),
    );

    // Contract pruned edges and rebuild.
    let mut contraction = Contraction::new(graph.boundary().iter().cloned().collect());
    for id in &prune {
        let e = graph.edge(id).expect("validated above");
        contraction.union(&e.tail, &e.head);
    }

    let mut new_edges = Vec::with_capacity(survivors.len());
    for (i, id) in survivors.iter().enumerate() {
        let e = graph.edge(id).expect("survivor exists");
        let tail = contraction.find(&e.tail);
        let head = contraction.find(&e.head);
        if tail == head {
            return Err(PruneError::LoopCreated(id.clone()));
        }
        new_edges.push((Edge::new(id.clone(), tail, head), weights[i]));
    }

    let mut new_vertices: BTreeSet<VertexId> = BTreeSet::new();
    for v in graph.vertices() {
        new_vertices.insert(contraction.find(v));
    }
    let mut new_boundary: Vec<VertexId> = Vec::new();
    for b in graph.boundary() {
        let r = contraction.find(b);
        if !new_boundary.contains(&r) {
            new_boundary.push(r);
        }
    }

    let mut new_paths: BTreeMap<(VertexId, VertexId), Vec<EdgeId>> = BTreeMap::new();
    for (u, v) in &pairs {
        let chain: Vec<EdgeId> = graph
            .path(u, v)
            .expect("pair comes from the graph")
            .iter()
            .filter(|e| !prune.contains(e))
            .cloned()
            .collect();
        let nu = contraction.find(u);
        let nv = contraction.find(v);
        if nu == nv {
            return Err(PruneError::EndpointsMerged(u.clone(), v.clone()));
        }
        // Merged boundary vertices can collapse two pairs onto one key;
        // consistent inputs give them identical surviving chains.
        if let Some(existing) = new_paths.get(&(nu.clone(), nv.clone())) {
            if *existing != chain {
                return Err(PruneError::Graph(GraphError::DuplicatePath(nu, nv)));
            }
            continue;
        }
        new_paths.insert((nu, nv), chain);
    }

    // The input may predate its own consistency restoration (fused graphs
    // are pruned precisely to become consistent), so validation here is
    // structural only.
    let new_graph = build_partial_graph_relaxed(
        new_vertices,
        new_edges,
        new_boundary,
        new_paths,
    )?;
    let weights = new_graph
        .edge_order()
        .iter()
        .map(|e| new_graph.weights()[e])
        .collect();
    Ok(PruneResult {
        weights,
        residual,
        pruned: prune
            .iter()
            .map(|&id| (id.clone(), graph.weights()[id]))
            .collect(),
        negative_entries,
        graph: new_graph,
    })
}

/// True when pruning the edge provably keeps the path system consistent:
/// the edge is strictly the lightest leaving its non-boundary tail, or
/// strictly the lightest entering its non-boundary head. A sole edge
/// satisfies the strictness vacuously.
pub fn is_safe_prune(graph: &PartialNetworkGraph, edge_id: &str) -> bool {
    let Some(edge) = graph.edge(edge_id) else {
        return false;
    };
    let w = graph.weights()[&edge.id];
    let tail_ok = !graph.is_boundary(&edge.tail)
        && graph
            .edges()
            .filter(|e| e.tail == edge.tail && e.id != edge.id)
            .all(|e| graph.weights()[&e.id] > w);
    if tail_ok {
        return true;
    }
    !graph.is_boundary(&edge.head)
        && graph
            .edges()
            .filter(|e| e.head == edge.head && e.id != edge.id)
            .all(|e| graph.weights()[&e.id] > w)
}

/// Edges whose weight ratio to the maximum weight is at most `delta`, in
/// canonical edge order.
pub fn edges_below_factor(graph: &PartialNetworkGraph, delta: f64) -> Vec<EdgeId> {
    let w_max = graph
        .weights()
        .values()
        .fold(0.0_f64, |a, &v| a.max(v));
    graph
        .edge_order()
        .into_iter()
        .filter(|e| ratio(graph.weights()[e], w_max) <= delta)
        .collect()
}

fn ratio(w: f64, w_max: f64) -> f64 {
    if w_max <= 0.0 {
        0.0
    } else {
        w / w_max
    }
}

/// Picks a pruning factor from the discontinuity structure of the
/// pruned-edge-density step function on `[0, delta_max]`.
///
/// The candidate points are the distinct weight ratios at most `delta_max`;
/// the chosen factor is the candidate with the widest gap to the next
/// discontinuity (with `delta_max` acting as the final fence), ties going
/// to the smaller factor. No candidates means nothing is light enough to
/// prune and 0 is returned.
pub fn select_pruning_factor(
    graph: &PartialNetworkGraph,
    delta_max: f64,
) -> Result<f64, PruneError> {
    assert!(
        delta_max > 0.0 && delta_max <= 1.0,
        "delta_max must lie in (0, 1]"
    );
    if graph.num_edges() == 0 {
        return Err(PruneError::NoEdges);
    }
    let w_max = graph
        .weights()
        .values()
        .fold(0.0_f64, |a, &v| a.max(v));
    let mut points: Vec<f64> = graph
        .weights()
        .values()
        .map(|&w| ratio(w, w_max))
        .filter(|&r| r <= delta_max)
        .collect();
    points.sort_by(|a, b| a.partial_cmp(b).expect("ratios are finite"));
    points.dedup();
    if points.is_empty() {
        return Ok(0.0);
    }
    let mut best = 0usize;
    let mut best_gap = f64::NEG_INFINITY;
    for (k, &p) in points.iter().enumerate() {
        let next = points.get(k + 1).copied().unwrap_or(delta_max);
        let gap = next - p;
        if gap > best_gap {
            best_gap = gap;
            best = k;
        }
    }
    Ok(points[best])
}

/// Prunes the maximal set of lightest edges whose squared weights fit the
/// budget, then redistributes.
///
/// Candidates are taken ascending by (weight, id) and screened by the
/// admissibility rules of [`screen_prune_set`], so the result stays well
/// formed.
pub fn prune_by_budget(
    graph: &PartialNetworkGraph,
    budget: f64,
    positivity: Option<PositivityMethod>,
) -> Result<PruneResult, PruneError> {
    assert!(budget >= 0.0, "budget must be nonnegative");
    let mut candidates: Vec<(f64, EdgeId)> = graph
        .edge_order()
        .into_iter()
        .map(|e| (graph.weights()[&e], e))
        .collect();
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("weights are finite"));

    let mut screen = Screen::new(graph);
    let mut spent = 0.0;
    for (w, id) in candidates {
        if spent + w * w > budget {
            break;
        }
        if screen.admit(&id) {
            spent += w * w;
        }
    }
    let chosen: Vec<EdgeId> = screen.chosen.into_iter().collect();
    redistribute_after_prune(graph, &chosen, positivity)
}

/// Filters a prune candidate list down to a structurally admissible set.
///
/// Candidates are admitted greedily in the order given under the same
/// rules [`prune_by_budget`] applies; the result never trips the
/// structural errors of [`redistribute_after_prune`] (weight feasibility
/// is that function's own concern).
pub fn screen_prune_set(graph: &PartialNetworkGraph, candidates: &[EdgeId]) -> Vec<EdgeId> {
    let mut screen = Screen::new(graph);
    candidates
        .iter()
        .filter(|id| screen.admit(id))
        .cloned()
        .collect()
}

/// Greedy admissibility state for building a prune set. An edge is
/// admitted when, together with everything admitted before it, its
/// contraction leaves every path at least one edge, turns no surviving
/// edge into a loop, merges no two boundary vertices, and pulls no
/// boundary vertex into the interior of a surviving path: exactly the
/// conditions under which [`redistribute_after_prune`] can rebuild the
/// graph.
struct Screen<'g> {
    graph: &'g PartialNetworkGraph,
    pairs: Vec<(VertexId, VertexId)>,
    remaining: Vec<usize>,
    on_paths: BTreeMap<EdgeId, Vec<usize>>,
    contraction: Contraction,
    chosen: BTreeSet<EdgeId>,
}

impl<'g> Screen<'g> {
    fn new(graph: &'g PartialNetworkGraph) -> Self {
        let pairs = graph.ordered_pairs();
        let mut remaining = Vec::with_capacity(pairs.len());
        let mut on_paths: BTreeMap<EdgeId, Vec<usize>> = BTreeMap::new();
        for (i, (u, v)) in pairs.iter().enumerate() {
            let chain = graph.path(u, v).expect("pair from graph");
            remaining.push(chain.len());
            for e in chain {
                on_paths.entry(e.clone()).or_default().push(i);
            }
        }
        Screen {
            graph,
            pairs,
            remaining,
            on_paths,
            contraction: Contraction::new(graph.boundary().iter().cloned().collect()),
            chosen: BTreeSet::new(),
        }
    }

    fn admit(&mut self, id: &EdgeId) -> bool {
        if self.chosen.contains(id) {
            return false;
        }
        let Some(edge) = self.graph.edge(id) else {
            return false;
        };
        let paths = self
            .on_paths
            .get(id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
            .to_vec();
        if paths.iter().any(|&i| self.remaining[i] == 1) {
            return false;
        }
        let mut trial = self.contraction.clone();
        trial.union(&edge.tail, &edge.head);
        let loops = self.graph.edges().any(|e| {
            e.id != *id
                && !self.chosen.contains(&e.id)
                && trial.find(&e.tail) == trial.find(&e.head)
        });
        if loops {
            return false;
        }
        let boundary_reps: BTreeSet<VertexId> = self
            .graph
            .boundary()
            .iter()
            .map(|b| trial.find(b))
            .collect();
        if boundary_reps.len() < self.graph.boundary().len() {
            return false;
        }
        for (u, v) in &self.pairs {
            let chain = self.graph.path(u, v).expect("pair from graph");
            let surviving: Vec<&EdgeId> = chain
                .iter()
                .filter(|e| *e != id && !self.chosen.contains(*e))
                .collect();
            for e in &surviving[..surviving.len().saturating_sub(1)] {
                let head = &self.graph.edge(e).expect("edge from path").head;
                if boundary_reps.contains(&trial.find(head)) {
                    return false;
                }
            }
        }
        self.contraction = trial;
        for i in paths {
            self.remaining[i] -= 1;
        }
        self.chosen.insert(id.clone());
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::tests::{crossing_paths_graph, three_star};
    use crate::netgraph::build_partial_graph;
    use alloc::string::{String, ToString};
    use alloc::vec;

    #[test]
    fn empty_prune_set_is_identity() {
        let g = crossing_paths_graph();
        let res = redistribute_after_prune(&g, &[], None).unwrap();
        assert_eq!(res.graph, g);
        assert_eq!(res.residual, 0.0);
        assert!(res.pruned.is_empty());
    }

    #[test]
    fn chain_prune_splits_weight_evenly() {
        // b1 -> c -> c2 -> b2 single path; pruning the middle edge shares
        // its weight between the neighbours.
        let vertices = ["b1", "b2", "c", "c2"].map(String::from).to_vec();
        let edges = vec![
            (Edge::new("e1", "b1", "c"), 3.0),
            (Edge::new("e2", "c", "c2"), 0.5),
            (Edge::new("e3", "c2", "b2"), 4.0),
        ];
        let boundary = ["b1", "b2"].map(String::from).to_vec();
        let paths = vec![(
            ("b1".into(), "b2".into()),
            vec!["e1".into(), "e2".into(), "e3".into()],
        )];
        let g = build_partial_graph(vertices, edges, boundary, paths).unwrap();
        let res = redistribute_after_prune(&g, &["e2".to_string()], None).unwrap();
        assert_eq!(res.graph.num_edges(), 2);
        assert!((res.graph.weights()["e1"] - 3.25).abs() < 1e-12);
        assert!((res.graph.weights()["e3"] - 4.25).abs() < 1e-12);
        assert!((res.graph.path_weight("b1", "b2").unwrap() - 7.5).abs() < 1e-12);
        assert!(res.residual < 1e-12);
        // c and c2 merged under the smaller id.
        assert!(res.graph.has_vertex("c"));
        assert!(!res.graph.has_vertex("c2"));
    }

    #[test]
    fn crossing_prune_recovers_quarter_split() {
        // Removing the four middle edges leaves the inconsistent 4x4
        // system; least squares spreads the average 21.5 as 10.75 per edge.
        let g = crossing_paths_graph();
        let prune: Vec<EdgeId> = ["s1", "s2", "s3", "s4"].map(String::from).to_vec();
        let res = redistribute_after_prune(&g, &prune, None).unwrap();
        assert_eq!(res.graph.num_edges(), 4);
        for id in ["w1", "w2", "w3", "w4"] {
            assert!((res.graph.weights()[id] - 10.75).abs() < 1e-9);
        }
        assert!(res.residual > 0.5);
        assert_eq!(res.pruned.len(), 4);
    }

    #[test]
    fn path_vanishing_is_rejected() {
        let g = three_star();
        // Pruning both edges of the (a, b) path erases it.
        let err =
            redistribute_after_prune(&g, &["ah".to_string(), "hb".to_string()], None).unwrap_err();
        assert!(matches!(err, PruneError::PathVanishes(_, _)));
    }

    #[test]
    fn safe_prune_detection_on_fan() {
        // Interior u fans out with weights 0.1, 5, 7; the light edge is
        // safe, the heavy ones are not.
        let vertices = ["a", "b", "c", "d", "u"].map(String::from).to_vec();
        let edges = vec![
            (Edge::new("in", "a", "u"), 2.0),
            (Edge::new("light", "u", "b"), 0.1),
            (Edge::new("mid", "u", "c"), 5.0),
            (Edge::new("heavy", "u", "d"), 7.0),
        ];
        let boundary = ["a", "b", "c", "d"].map(String::from).to_vec();
        let paths = vec![
            (("a".into(), "b".into()), vec!["in".into(), "light".into()]),
            (("a".into(), "c".into()), vec!["in".into(), "mid".into()]),
            (("a".into(), "d".into()), vec!["in".into(), "heavy".into()]),
        ];
        let g = build_partial_graph(vertices, edges, boundary, paths).unwrap();
        assert!(is_safe_prune(&g, "light"));
        assert!(!is_safe_prune(&g, "mid"));
        assert!(!is_safe_prune(&g, "heavy"));
        // "in" is the sole edge into u, vacuously lightest.
        assert!(is_safe_prune(&g, "in"));
    }

    #[test]
    fn boundary_endpoints_are_never_safe() {
        let g = crossing_paths_graph();
        // w1 runs b1 -> c1: tail is boundary; head c1 has only w1 entering,
        // so the head rule applies vacuously.
        assert!(is_safe_prune(&g, "w1"));
        // Middle edges out of c1: s2 (weight 1) is strictly lightest out of
        // c1 and strictly lightest into d2.
        assert!(is_safe_prune(&g, "s2"));
        // s1 (weight 2) is neither lightest out of c1 nor into d1.
        assert!(!is_safe_prune(&g, "s1"));
    }

    #[test]
    fn tie_breaks_strictness() {
        let vertices = ["a", "b", "c", "u"].map(String::from).to_vec();
        let edges = vec![
            (Edge::new("in", "a", "u"), 2.0),
            (Edge::new("t1", "u", "b"), 0.1),
            (Edge::new("t2", "u", "c"), 0.1),
        ];
        let boundary = ["a", "b", "c"].map(String::from).to_vec();
        let paths = vec![
            (("a".into(), "b".into()), vec!["in".into(), "t1".into()]),
            (("a".into(), "c".into()), vec!["in".into(), "t2".into()]),
        ];
        let g = build_partial_graph(vertices, edges, boundary, paths).unwrap();
        // Tied out-edges: neither is strictly smallest out of u, and their
        // heads are boundary vertices.
        assert!(!is_safe_prune(&g, "t1"));
        assert!(!is_safe_prune(&g, "t2"));
    }

    #[test]
    fn safe_prune_preserves_path_weights() {
        let g = crossing_paths_graph();
        for id in ["s2", "s3"] {
            assert!(is_safe_prune(&g, id));
            let res = redistribute_after_prune(&g, &[id.to_string()], None).unwrap();
            assert!(res.residual < 1e-9, "pruning {id}");
            for (u, v) in g.ordered_pairs() {
                let before = g.path_weight(&u, &v).unwrap();
                let after = res.graph.path_weight(&u, &v).unwrap();
                assert!((before - after).abs() < 1e-9, "pair ({u}, {v})");
            }
        }
    }

    #[test]
    fn pruning_factor_picks_widest_gap() {
        let vertices = ["a", "b", "x", "y", "z"].map(String::from).to_vec();
        let edges = vec![
            (Edge::new("e1", "a", "x"), 0.01),
            (Edge::new("e2", "x", "y"), 0.02),
            (Edge::new("e3", "y", "z"), 1.0),
            (Edge::new("e4", "z", "b"), 1.1),
        ];
        let boundary = ["a", "b"].map(String::from).to_vec();
        let paths = vec![(
            ("a".into(), "b".into()),
            vec!["e1".into(), "e2".into(), "e3".into(), "e4".into()],
        )];
        let g = build_partial_graph(vertices, edges, boundary, paths).unwrap();
        let delta = select_pruning_factor(&g, 0.2).unwrap();
        // Ratios 0.00909 and 0.01818; the gap to the 0.2 fence dominates.
        assert!((delta - 0.02 / 1.1).abs() < 1e-12);
        let pruned = edges_below_factor(&g, delta);
        assert_eq!(pruned, vec!["e1".to_string(), "e2".to_string()]);
    }

    #[test]
    fn pruning_factor_degenerate_uniform_weights() {
        let g = three_star();
        // All ratios are exactly 1 > delta_max: nothing is prunable.
        let delta = select_pruning_factor(&g, 0.2).unwrap();
        assert_eq!(delta, 0.0);
        assert!(edges_below_factor(&g, delta).is_empty());
    }

    #[test]
    fn factor_prune_sets_are_monotone() {
        let g = crossing_paths_graph();
        let small = edges_below_factor(&g, 0.1);
        let large = edges_below_factor(&g, 0.3);
        for e in &small {
            assert!(large.contains(e));
        }
    }

    #[test]
    fn budget_prune_takes_lightest_feasible_edges() {
        let g = crossing_paths_graph();
        // Weights are s2=1, s3=1, s1=2, s4=2, w*=10. Budget 6 admits s2 and
        // s3 (1+1); either 2-weight edge would then close a cycle of middle
        // vertices and loop the other, so both are skipped.
        let res = prune_by_budget(&g, 6.0, None).unwrap();
        let mut pruned: Vec<&str> = res.pruned.iter().map(|(id, _)| id.as_str()).collect();
        pruned.sort();
        assert_eq!(pruned, ["s2", "s3"]);
        assert!(res.residual < 1e-9);
        for (u, v) in g.ordered_pairs() {
            let before = g.path_weight(&u, &v).unwrap();
            let after = res.graph.path_weight(&u, &v).unwrap();
            assert!((before - after).abs() < 1e-9);
        }
    }

    #[test]
    fn budget_prune_skips_path_erasing_candidate() {
        // Single path of two light edges; the budget would take both, but
        // the second would erase the path, so only one is pruned.
        let vertices = ["a", "b", "x"].map(String::from).to_vec();
        let edges = vec![
            (Edge::new("e1", "a", "x"), 1.0),
            (Edge::new("e2", "x", "b"), 1.0),
        ];
        let boundary = ["a", "b"].map(String::from).to_vec();
        let paths = vec![(
            ("a".into(), "b".into()),
            vec!["e1".into(), "e2".into()],
        )];
        let g = build_partial_graph(vertices, edges, boundary, paths).unwrap();
        let res = prune_by_budget(&g, 10.0, None).unwrap();
        assert_eq!(res.pruned.len(), 1);
        assert_eq!(res.pruned[0].0, "e1");
        assert!((res.graph.path_weight("a", "b").unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn budget_zero_prunes_nothing() {
        let g = crossing_paths_graph();
        let res = prune_by_budget(&g, 0.0, None).unwrap();
        assert!(res.pruned.is_empty());
        assert_eq!(res.graph, g);
    }
}
