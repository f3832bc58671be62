//! Merging source and receiver trees into one network graph.
//!
//! For an ordered boundary pair (u, v), the source tree at u and the
//! receiver tree at v each describe the same directed path with their own
//! interior vertices. Placing both vertex sets on a common axis by
//! cumulative distance from u interleaves them into a single chain; a
//! source vertex and a receiver vertex landing within the merge tolerance
//! of each other are treated as one vertex. A tree vertex appearing on
//! several pairs' chains is the same fused vertex on each, which stitches
//! the chains into a network.
//!
//! The chain step is a per-path primitive: it reconstructs exactly the
//! graphs whose interior structure is visible along individual paths, and
//! it relies on vertex provenance (which tree a vertex came from) for
//! cross-pair identity. Both are deliberate simplifications; the fused
//! graph is intended as input to pruning and weight redistribution, not
//! as a complete topology reconstruction.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use crate::consistency::{asymmetry_vector, TreeCollection};
use crate::netgraph::{
    build_partial_graph_relaxed, Edge, EdgeId, GraphError, Orientation, PartialNetworkGraph,
    VertexId,
};

/// Identity of a vertex inside one tree of a collection: orientation and
/// root pick the tree, the last component is the vertex's name there.
pub type TreeVertexRef = (Orientation, VertexId, VertexId);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FusionError {
    #[error("trees are not consistent: path weight asymmetry {0} exceeds tolerance {1}")]
    NotConsistent(f64, f64),
    #[error("negative gap {gap} between `{from}` and `{to}` on the chain {pair_source}->{pair_receiver}")]
    NegativeGap {
        pair_source: VertexId,
        pair_receiver: VertexId,
        from: VertexId,
        to: VertexId,
        gap: f64,
    },
    #[error("merge tolerance must be finite and nonnegative, got {0}")]
    BadTolerance(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Shared-subpath weights for every pair of paths sharing an endpoint:
/// per tree, the cumulative weight from the root to each leaf pair's meet
/// vertex.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Pcd {
    entries: BTreeMap<(Orientation, VertexId, VertexId, VertexId), f64>,
}

impl Pcd {
    /// Shared weight of the two paths joining `root` to `leaf_a` and
    /// `leaf_b` in the tree of the given orientation; `None` when that
    /// tree or leaf pair is absent.
    pub fn shared_weight(
        &self,
        orientation: Orientation,
        root: &str,
        leaf_a: &str,
        leaf_b: &str,
    ) -> Option<f64> {
        let (x, y) = if leaf_a <= leaf_b {
            (leaf_a, leaf_b)
        } else {
            (leaf_b, leaf_a)
        };
        self.entries
            .get(&(orientation, root.into(), x.into(), y.into()))
            .copied()
    }

    pub fn iter(
        &self,
    ) -> impl Iterator<Item = (&(Orientation, VertexId, VertexId, VertexId), &f64)> {
        self.entries.iter()
    }
}

/// Computes the shared-subpath weight of every leaf pair in every tree.
pub fn compute_pcd(trees: &TreeCollection) -> Pcd {
    let mut entries = BTreeMap::new();
    for tree in trees.trees() {
        let leaves = tree.leaves();
        for i in 0..leaves.len() {
            for j in (i + 1)..leaves.len() {
                let w = tree
                    .meet_weight(&leaves[i], &leaves[j])
                    .expect("leaves come from the tree itself");
                entries.insert(
                    (
                        tree.orientation(),
                        tree.root().clone(),
                        leaves[i].clone(),
                        leaves[j].clone(),
                    ),
                    w,
                );
            }
        }
    }
    Pcd { entries }
}

/// A fused network graph plus, for each interior vertex, the set of tree
/// vertices it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedGraph {
    pub graph: PartialNetworkGraph,
    pub provenance: BTreeMap<VertexId, BTreeSet<TreeVertexRef>>,
}

// Union-find keyed by tree-vertex identity; the class representative is
// the smallest member, which also names the fused vertex.
struct Classes {
    parent: BTreeMap<TreeVertexRef, TreeVertexRef>,
}

impl Classes {
    fn new() -> Self {
        Classes {
            parent: BTreeMap::new(),
        }
    }

    fn find(&mut self, v: &TreeVertexRef) -> TreeVertexRef {
        let p = match self.parent.get(v) {
            None => {
                self.parent.insert(v.clone(), v.clone());
                return v.clone();
            }
            Some(p) => p.clone(),
        };
        if p == *v {
            return p;
        }
        let root = self.find(&p);
        self.parent.insert(v.clone(), root.clone());
        root
    }

    fn union(&mut self, a: &TreeVertexRef, b: &TreeVertexRef) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            let (keep, move_) = if ra <= rb { (ra, rb) } else { (rb, ra) };
            self.parent.insert(move_, keep);
        }
    }
}

/// Fuses the collection's trees into one graph.
///
/// Requires the collection to be consistent up to `tau`: the largest
/// absolute path-weight asymmetry must not exceed it (restore consistency
/// first when it does). Interior vertices from opposite trees within
/// `tau` of each other on a chain are identified; vertices of the same
/// tree never are. Edge weights are consecutive position gaps, averaged
/// when several chains traverse the same fused edge.
///
/// Fails with [`FusionError::NegativeGap`] when identification reorders a
/// chain, which indicates weights too corrupt for the tolerance.
pub fn fuse_network(trees: &TreeCollection, tau: f64) -> Result<FusedGraph, FusionError> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(FusionError::BadTolerance(tau));
    }
    let asymmetry = asymmetry_vector(trees);
    let worst = asymmetry.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    if worst > tau {
        return Err(FusionError::NotConsistent(worst, tau));
    }

    let mut classes = Classes::new();
    // Positions include both endpoints; nodes exclude them (endpoints are
    // the pair's boundary vertices).
    struct Chain {
        source: VertexId,
        receiver: VertexId,
        nodes: Vec<TreeVertexRef>,
        positions: Vec<f64>,
    }
    let mut chains: Vec<Chain> = Vec::new();

    for (u, v) in trees.ordered_pairs() {
        let s_tree = trees
            .source_tree(&u)
            .expect("ordered pair implies source tree");
        let r_tree = trees
            .receiver_tree(&v)
            .expect("ordered pair implies receiver tree");
        let s_positions = s_tree.interior_positions(&v)?;
        let r_positions = r_tree.interior_positions(&u)?;
        let w_s = s_tree.path_weight(&v)?;
        let w_r = r_tree.path_weight(&u)?;
        let total = 0.5 * (w_s + w_r);

        let mut nodes: Vec<TreeVertexRef> = Vec::new();
        let mut positions: Vec<f64> = Vec::new();
        positions.push(0.0);
        let (mut i, mut j) = (0, 0);
        let s_ref = |name: &VertexId| (Orientation::Source, u.clone(), name.clone());
        let r_ref = |name: &VertexId| (Orientation::Receiver, v.clone(), name.clone());
        while i < s_positions.len() || j < r_positions.len() {
            match (s_positions.get(i), r_positions.get(j)) {
                (Some((sn, sp)), Some((rn, rp))) if (sp - rp).abs() <= tau => {
                    let (a, b) = (s_ref(sn), r_ref(rn));
                    classes.union(&a, &b);
                    nodes.push(a);
                    positions.push(0.5 * (sp + rp));
                    i += 1;
                    j += 1;
                }
                (Some((sn, sp)), r) if r.map(|(_, rp)| sp <= rp).unwrap_or(true) => {
                    nodes.push(s_ref(sn));
                    positions.push(*sp);
                    i += 1;
                }
                (_, Some((rn, rp))) => {
                    nodes.push(r_ref(rn));
                    positions.push(*rp);
                    j += 1;
                }
                (Some((sn, sp)), None) => {
                    nodes.push(s_ref(sn));
                    positions.push(*sp);
                    i += 1;
                }
                (None, None) => unreachable!("loop condition"),
            }
        }
        // Register singletons too, so provenance later covers every node.
        for node in &nodes {
            classes.find(node);
        }
        positions.push(total);
        chains.push(Chain {
            source: u,
            receiver: v,
            nodes,
            positions,
        });
    }

    // Deterministic names: boundary vertices keep theirs, interior classes
    // are named after their smallest member.
    fn name_of(classes: &mut Classes, r: &TreeVertexRef) -> VertexId {
        let (orientation, root, local) = classes.find(r);
        format!("{}:{}:{}", orientation.as_str(), root, local)
    }

    let mut vertices: BTreeSet<VertexId> = trees.boundary().iter().cloned().collect();
    // All unions are in by now, so class representatives (and with them
    // vertex names) are final. Every ref that appeared on a chain is a key
    // of the union-find.
    let mut provenance: BTreeMap<VertexId, BTreeSet<TreeVertexRef>> = BTreeMap::new();
    let refs: Vec<TreeVertexRef> = classes.parent.keys().cloned().collect();
    for r in refs {
        provenance
            .entry(name_of(&mut classes, &r))
            .or_default()
            .insert(r);
    }
    // Gap observations per (tail, head), averaged into the edge weight.
    let mut gaps: BTreeMap<(VertexId, VertexId), Vec<f64>> = BTreeMap::new();
    let mut paths: BTreeMap<(VertexId, VertexId), Vec<EdgeId>> = BTreeMap::new();

    for chain in &chains {
        let mut stops: Vec<VertexId> = Vec::with_capacity(chain.nodes.len() + 2);
        stops.push(chain.source.clone());
        for node in &chain.nodes {
            let name = name_of(&mut classes, node);
            vertices.insert(name.clone());
            stops.push(name);
        }
        stops.push(chain.receiver.clone());

        let mut chain_edges: Vec<EdgeId> = Vec::with_capacity(stops.len() - 1);
        for k in 0..stops.len() - 1 {
            let gap = chain.positions[k + 1] - chain.positions[k];
            if gap < -1e-9 {
                return Err(FusionError::NegativeGap {
                    pair_source: chain.source.clone(),
                    pair_receiver: chain.receiver.clone(),
                    from: stops[k].clone(),
                    to: stops[k + 1].clone(),
                    gap,
                });
            }
            let key = (stops[k].clone(), stops[k + 1].clone());
            gaps.entry(key).or_default().push(gap.max(0.0));
            chain_edges.push(format!("{}>{}", stops[k], stops[k + 1]));
        }
        paths.insert((chain.source.clone(), chain.receiver.clone()), chain_edges);
    }

    let edges: Vec<(Edge, f64)> = gaps
        .into_iter()
        .map(|((tail, head), obs)| {
            let id = format!("{tail}>{head}");
            let weight = obs.iter().sum::<f64>() / obs.len() as f64;
            (Edge::new(id, tail, head), weight)
        })
        .collect();

    let graph = build_partial_graph_relaxed(vertices, edges, trees.boundary().to_vec(), paths)?;
    Ok(FusedGraph { graph, provenance })
}
