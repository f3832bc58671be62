//! Partial network graphs: the directed multigraph a tomography session can
//! see, together with one routing path per measurable ordered boundary pair.
//!
//! Three standing assumptions are validated on construction and relied on
//! everywhere downstream:
//!
//! 1. each ordered boundary pair has at most one path, and a path is a
//!    connected edge chain from its source to its receiver;
//! 2. boundary vertices never appear in the interior of a path;
//! 3. any two paths visiting vertices `x` then `y` use the identical
//!    subpath between them (shared-subpath consistency).
//!
//! Vertex and edge ids are opaque strings. Deterministic orderings used for
//! matrix construction: boundary vertices in their declared order, ordered
//! pairs sorted source-major by boundary position, edges lexicographically
//! by id.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

pub type VertexId = String;
pub type EdgeId = String;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub tail: VertexId,
    pub head: VertexId,
}

impl Edge {
    pub fn new(id: impl Into<EdgeId>, tail: impl Into<VertexId>, head: impl Into<VertexId>) -> Self {
        Edge {
            id: id.into(),
            tail: tail.into(),
            head: head.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("unknown vertex `{0}` referenced by {1}")]
    UnknownVertex(VertexId, &'static str),
    #[error("unknown edge `{0}` referenced by {1}")]
    UnknownEdge(EdgeId, &'static str),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(EdgeId),
    #[error("edge `{0}` is a self-loop")]
    LoopEdge(EdgeId),
    #[error("negative weight {1} on edge `{0}`")]
    NegativeWeight(EdgeId, f64),
    #[error("non-finite weight on edge `{0}`")]
    NonFiniteWeight(EdgeId),
    #[error("duplicate boundary vertex `{0}`")]
    DuplicateBoundary(VertexId),
    #[error("more than one path declared for pair ({0}, {1})")]
    DuplicatePath(VertexId, VertexId),
    #[error("path ({0}, {1}) is empty")]
    EmptyPath(VertexId, VertexId),
    #[error("path ({0}, {1}) endpoints must be distinct boundary vertices")]
    BadEndpoints(VertexId, VertexId),
    #[error("path ({0}, {1}) is not a connected chain from source to receiver")]
    BrokenPath(VertexId, VertexId),
    #[error("boundary vertex `{2}` lies interior to path ({0}, {1})")]
    BoundaryInterior(VertexId, VertexId, VertexId),
    #[error("paths ({pair_a_source}, {pair_a_receiver}) and ({pair_b_source}, {pair_b_receiver}) disagree on the subpath from `{from}` to `{to}`")]
    PathInconsistency {
        pair_a_source: VertexId,
        pair_a_receiver: VertexId,
        pair_b_source: VertexId,
        pair_b_receiver: VertexId,
        from: VertexId,
        to: VertexId,
    },
    #[error("no path recorded for pair ({0}, {1})")]
    UnknownPath(VertexId, VertexId),
    #[error("paths rooted at `{0}` do not form a tree: {1}")]
    NotATree(VertexId, &'static str),
    #[error("vertex `{0}` is not a boundary vertex")]
    NotBoundary(VertexId),
}

/// Tree orientation: a source tree carries the paths leaving its root, a
/// receiver tree the paths arriving at its root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Orientation {
    Source,
    Receiver,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Source => "source",
            Orientation::Receiver => "receiver",
        }
    }
}

/// Directed graph with boundary vertices, nonnegative edge weights and one
/// routing path per measurable ordered boundary pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialNetworkGraph {
    vertices: BTreeSet<VertexId>,
    boundary: Vec<VertexId>,
    boundary_index: BTreeMap<VertexId, usize>,
    edges: BTreeMap<EdgeId, Edge>,
    weights: BTreeMap<EdgeId, f64>,
    paths: BTreeMap<(VertexId, VertexId), Vec<EdgeId>>,
}

/// Builds a graph and checks every standing assumption.
pub fn build_partial_graph(
    vertices: impl IntoIterator<Item = VertexId>,
    edges: impl IntoIterator<Item = (Edge, f64)>,
    boundary: impl IntoIterator<Item = VertexId>,
    paths: impl IntoIterator<Item = ((VertexId, VertexId), Vec<EdgeId>)>,
) -> Result<PartialNetworkGraph, GraphError> {
    PartialNetworkGraph::build(vertices, edges, boundary, paths, true)
}

/// Builds a graph without the shared-subpath consistency check.
///
/// Networks assembled from noisily inferred trees place near-duplicate
/// vertices on different pairs' paths and only become consistent after
/// pruning; this constructor admits them. All structural checks (chain
/// connectivity, boundary interiority, weight signs) still apply.
pub fn build_partial_graph_relaxed(
    vertices: impl IntoIterator<Item = VertexId>,
    edges: impl IntoIterator<Item = (Edge, f64)>,
    boundary: impl IntoIterator<Item = VertexId>,
    paths: impl IntoIterator<Item = ((VertexId, VertexId), Vec<EdgeId>)>,
) -> Result<PartialNetworkGraph, GraphError> {
    PartialNetworkGraph::build(vertices, edges, boundary, paths, false)
}

impl PartialNetworkGraph {
    fn build(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (Edge, f64)>,
        boundary: impl IntoIterator<Item = VertexId>,
        paths: impl IntoIterator<Item = ((VertexId, VertexId), Vec<EdgeId>)>,
        check_shared_subpaths: bool,
    ) -> Result<Self, GraphError> {
        let vertices: BTreeSet<VertexId> = vertices.into_iter().collect();

        let mut edge_map = BTreeMap::new();
        let mut weights = BTreeMap::new();
        for (edge, weight) in edges {
            if !vertices.contains(&edge.tail) {
                return Err(GraphError::UnknownVertex(edge.tail, "an edge tail"));
            }
            if !vertices.contains(&edge.head) {
                return Err(GraphError::UnknownVertex(edge.head, "an edge head"));
            }
            if edge.tail == edge.head {
                return Err(GraphError::LoopEdge(edge.id));
            }
            if !weight.is_finite() {
                return Err(GraphError::NonFiniteWeight(edge.id));
            }
            if weight < 0.0 {
                return Err(GraphError::NegativeWeight(edge.id, weight));
            }
            let id = edge.id.clone();
            if edge_map.insert(id.clone(), edge).is_some() {
                return Err(GraphError::DuplicateEdge(id));
            }
            weights.insert(id, weight);
        }

        let boundary: Vec<VertexId> = boundary.into_iter().collect();
        let mut boundary_index = BTreeMap::new();
        for (i, b) in boundary.iter().enumerate() {
            if !vertices.contains(b) {
                return Err(GraphError::UnknownVertex(b.clone(), "the boundary list"));
            }
            if boundary_index.insert(b.clone(), i).is_some() {
                return Err(GraphError::DuplicateBoundary(b.clone()));
            }
        }

        let mut path_map: BTreeMap<(VertexId, VertexId), Vec<EdgeId>> = BTreeMap::new();
        for ((source, receiver), chain) in paths {
            if source == receiver
                || !boundary_index.contains_key(&source)
                || !boundary_index.contains_key(&receiver)
            {
                return Err(GraphError::BadEndpoints(source, receiver));
            }
            if chain.is_empty() {
                return Err(GraphError::EmptyPath(source, receiver));
            }
            if path_map.contains_key(&(source.clone(), receiver.clone())) {
                return Err(GraphError::DuplicatePath(source, receiver));
            }
            let mut at = &source;
            for (i, eid) in chain.iter().enumerate() {
                let edge = edge_map
                    .get(eid)
                    .ok_or_else(|| GraphError::UnknownEdge(eid.clone(), "a path"))?;
                if edge.tail != *at {
                    return Err(GraphError::BrokenPath(source, receiver));
                }
                let interior = i + 1 < chain.len();
                if interior && boundary_index.contains_key(&edge.head) {
                    return Err(GraphError::BoundaryInterior(
                        source,
                        receiver,
                        edge.head.clone(),
                    ));
                }
                at = &edge.head;
            }
            if *at != receiver {
                return Err(GraphError::BrokenPath(source, receiver));
            }
            path_map.insert((source, receiver), chain);
        }

        let graph = PartialNetworkGraph {
            vertices,
            boundary,
            boundary_index,
            edges: edge_map,
            weights,
            paths: path_map,
        };
        if check_shared_subpaths {
            graph.check_shared_subpaths()?;
        }
        Ok(graph)
    }

    /// Shared-subpath consistency: between any two vertices, all paths that
    /// visit both use the identical edge chain.
    fn check_shared_subpaths(&self) -> Result<(), GraphError> {
        // (x, y) -> (owning pair, start, end) of the first subpath seen.
        let mut seen: BTreeMap<(&VertexId, &VertexId), (&(VertexId, VertexId), usize, usize)> =
            BTreeMap::new();
        for (pair, chain) in &self.paths {
            let verts = self.chain_vertices(chain);
            for i in 0..verts.len() {
                for j in (i + 1)..verts.len() {
                    let key = (verts[i], verts[j]);
                    match seen.get(&key) {
                        None => {
                            seen.insert(key, (pair, i, j));
                        }
                        Some(&(other_pair, s, e)) => {
                            let other_chain = &self.paths[other_pair];
                            if other_chain[s..e] != chain[i..j] {
                                return Err(GraphError::PathInconsistency {
                                    pair_a_source: other_pair.0.clone(),
                                    pair_a_receiver: other_pair.1.clone(),
                                    pair_b_source: pair.0.clone(),
                                    pair_b_receiver: pair.1.clone(),
                                    from: verts[i].clone(),
                                    to: verts[j].clone(),
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn chain_vertices<'a>(&'a self, chain: &'a [EdgeId]) -> Vec<&'a VertexId> {
        let mut out = Vec::with_capacity(chain.len() + 1);
        if let Some(first) = chain.first() {
            out.push(&self.edges[first].tail);
        }
        for eid in chain {
            out.push(&self.edges[eid].head);
        }
        out
    }

    pub fn vertices(&self) -> impl Iterator<Item = &VertexId> {
        self.vertices.iter()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn has_vertex(&self, v: &str) -> bool {
        self.vertices.contains(v)
    }

    /// Boundary vertices in their declared order.
    pub fn boundary(&self) -> &[VertexId] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: &str) -> bool {
        self.boundary_index.contains_key(v)
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.get(id)
    }

    pub fn weight(&self, id: &str) -> Option<f64> {
        self.weights.get(id).copied()
    }

    pub fn weights(&self) -> &BTreeMap<EdgeId, f64> {
        &self.weights
    }

    /// Edge ids in the canonical (lexicographic) column order.
    pub fn edge_order(&self) -> Vec<EdgeId> {
        self.edges.keys().cloned().collect()
    }

    /// Ordered pairs with declared paths, sorted source-major by boundary
    /// position.
    pub fn ordered_pairs(&self) -> Vec<(VertexId, VertexId)> {
        let mut pairs: Vec<(VertexId, VertexId)> = self.paths.keys().cloned().collect();
        pairs.sort_by_key(|(u, v)| (self.boundary_index[u], self.boundary_index[v]));
        pairs
    }

    pub fn path(&self, source: &str, receiver: &str) -> Option<&[EdgeId]> {
        self.paths
            .get(&(source.to_owned(), receiver.to_owned()))
            .map(Vec::as_slice)
    }

    pub fn paths(&self) -> &BTreeMap<(VertexId, VertexId), Vec<EdgeId>> {
        &self.paths
    }

    /// Vertex sequence of a path, endpoints included.
    pub fn path_vertices(&self, source: &str, receiver: &str) -> Option<Vec<VertexId>> {
        self.path(source, receiver)
            .map(|chain| self.chain_vertices(chain).into_iter().cloned().collect())
    }

    /// Sum of edge weights along the pair's path.
    pub fn path_weight(&self, source: &str, receiver: &str) -> Result<f64, GraphError> {
        let chain = self.path(source, receiver).ok_or_else(|| {
            GraphError::UnknownPath(source.to_owned(), receiver.to_owned())
        })?;
        Ok(chain.iter().map(|e| self.weights[e]).sum())
    }

    /// Replaces the weight of an existing edge.
    pub fn set_weight(&mut self, id: &str, weight: f64) -> Result<(), GraphError> {
        if !weight.is_finite() {
            return Err(GraphError::NonFiniteWeight(id.to_owned()));
        }
        if weight < 0.0 {
            return Err(GraphError::NegativeWeight(id.to_owned(), weight));
        }
        match self.weights.get_mut(id) {
            Some(w) => {
                *w = weight;
                Ok(())
            }
            None => Err(GraphError::UnknownEdge(id.to_owned(), "set_weight")),
        }
    }

    /// Same graph with weights replaced, given in canonical edge order.
    pub fn with_weights(&self, weights: &[f64]) -> Result<PartialNetworkGraph, GraphError> {
        let order = self.edge_order();
        assert_eq!(
            weights.len(),
            order.len(),
            "weight vector length must equal the edge count"
        );
        let mut out = self.clone();
        for (id, &w) in order.iter().zip(weights) {
            out.set_weight(id, w)?;
        }
        Ok(out)
    }

    /// Decomposes the graph into the pieces `build_partial_graph` accepts.
    pub fn into_parts(
        self,
    ) -> (
        Vec<VertexId>,
        Vec<(Edge, f64)>,
        Vec<VertexId>,
        Vec<((VertexId, VertexId), Vec<EdgeId>)>,
    ) {
        let edges = self
            .edges
            .into_iter()
            .map(|(id, e)| {
                let w = self.weights[&id];
                (e, w)
            })
            .collect();
        (
            self.vertices.into_iter().collect(),
            edges,
            self.boundary,
            self.paths.into_iter().collect(),
        )
    }

    /// Source and receiver tree of a boundary vertex: the unions of its
    /// outgoing and incoming paths, validated to be trees.
    pub fn extract_trees(&self, root: &str) -> Result<(Tree, Tree), GraphError> {
        if !self.is_boundary(root) {
            return Err(GraphError::NotBoundary(root.to_owned()));
        }
        let source_edges = self.union_edges(|(s, _)| s == root);
        let receiver_edges = self.union_edges(|(_, r)| r == root);
        let source = Tree::new(
            root.to_owned(),
            Orientation::Source,
            source_edges.0,
            source_edges.1,
        )?;
        let receiver = Tree::new(
            root.to_owned(),
            Orientation::Receiver,
            receiver_edges.0,
            receiver_edges.1,
        )?;
        Ok((source, receiver))
    }

    fn union_edges(
        &self,
        select: impl Fn((&str, &str)) -> bool,
    ) -> (Vec<Edge>, BTreeMap<EdgeId, f64>) {
        let mut edges: BTreeMap<EdgeId, Edge> = BTreeMap::new();
        for ((s, r), chain) in &self.paths {
            if !select((s, r)) {
                continue;
            }
            for eid in chain {
                edges
                    .entry(eid.clone())
                    .or_insert_with(|| self.edges[eid].clone());
            }
        }
        let weights = edges
            .keys()
            .map(|id| (id.clone(), self.weights[id]))
            .collect();
        (edges.into_values().collect(), weights)
    }

    /// The graph on boundary vertices and branch points only, with runs of
    /// pass-through vertices contracted into single edges whose weight is
    /// the run's total. Path weights are preserved exactly.
    pub fn logical_subgraph(&self) -> Result<PartialNetworkGraph, GraphError> {
        // Degrees in the union of path edges determine branch points.
        let mut used_edges: BTreeSet<&EdgeId> = BTreeSet::new();
        for chain in self.paths.values() {
            used_edges.extend(chain.iter());
        }
        let mut in_deg: BTreeMap<&VertexId, usize> = BTreeMap::new();
        let mut out_deg: BTreeMap<&VertexId, usize> = BTreeMap::new();
        for eid in &used_edges {
            let e = &self.edges[*eid];
            *out_deg.entry(&e.tail).or_insert(0) += 1;
            *in_deg.entry(&e.head).or_insert(0) += 1;
        }
        let is_logical = |v: &VertexId| {
            self.boundary_index.contains_key(v)
                || in_deg.get(v).copied().unwrap_or(0) >= 2
                || out_deg.get(v).copied().unwrap_or(0) >= 2
        };

        let mut vertices: BTreeSet<VertexId> = self.boundary.iter().cloned().collect();
        // Segment (joined underlying ids) -> (id, tail, head, weight).
        let mut seg_edges: BTreeMap<Vec<EdgeId>, (EdgeId, VertexId, VertexId, f64)> =
            BTreeMap::new();
        let mut new_paths: Vec<((VertexId, VertexId), Vec<EdgeId>)> = Vec::new();

        for (pair, chain) in &self.paths {
            let verts = self.chain_vertices(chain);
            let mut new_chain: Vec<EdgeId> = Vec::new();
            let mut seg_start = 0usize;
            for i in 1..verts.len() {
                let cut = i == verts.len() - 1 || is_logical(verts[i]);
                if !cut {
                    continue;
                }
                let segment: Vec<EdgeId> = chain[seg_start..i].to_vec();
                let entry = seg_edges.entry(segment.clone()).or_insert_with(|| {
                    let id = if segment.len() == 1 {
                        segment[0].clone()
                    } else {
                        segment.join("+")
                    };
                    let weight = segment.iter().map(|e| self.weights[e]).sum();
                    (
                        id,
                        verts[seg_start].clone(),
                        verts[i].clone(),
                        weight,
                    )
                });
                vertices.insert(verts[seg_start].clone());
                vertices.insert(verts[i].clone());
                new_chain.push(entry.0.clone());
                seg_start = i;
            }
            new_paths.push((pair.clone(), new_chain));
        }

        let mut by_id: BTreeMap<EdgeId, (Edge, f64)> = BTreeMap::new();
        for (id, tail, head, weight) in seg_edges.into_values() {
            let edge = Edge::new(id.clone(), tail, head);
            if let Some((existing, _)) = by_id.get(&id) {
                if *existing != edge {
                    return Err(GraphError::DuplicateEdge(id));
                }
                continue;
            }
            by_id.insert(id, (edge, weight));
        }

        PartialNetworkGraph::build(
            vertices,
            by_id.into_values(),
            self.boundary.clone(),
            new_paths,
            true,
        )
    }
}

/// Routing tree of one boundary vertex.
///
/// Source trees point from the root to the leaves, receiver trees from the
/// leaves to the root. Edge ids are unique within one tree; the tree-local
/// canonical edge order is lexicographic by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    root: VertexId,
    orientation: Orientation,
    edges: BTreeMap<EdgeId, Edge>,
    weights: BTreeMap<EdgeId, f64>,
    leaves: Vec<VertexId>,
    /// Edge chain per leaf, in travel order (root->leaf for source trees,
    /// leaf->root for receiver trees).
    paths: BTreeMap<VertexId, Vec<EdgeId>>,
}

impl Tree {
    /// Validates that the edges form a tree spanning from (or into) the
    /// root and derives the leaf set and per-leaf paths.
    pub fn new(
        root: VertexId,
        orientation: Orientation,
        edges: Vec<Edge>,
        weights: BTreeMap<EdgeId, f64>,
    ) -> Result<Self, GraphError> {
        if edges.is_empty() {
            // Root-only tree: the boundary vertex serves no paths in this
            // orientation.
            return Ok(Tree {
                root,
                orientation,
                edges: BTreeMap::new(),
                weights: BTreeMap::new(),
                leaves: Vec::new(),
                paths: BTreeMap::new(),
            });
        }
        let mut edge_map: BTreeMap<EdgeId, Edge> = BTreeMap::new();
        // next[x] = edges leaving x in travel direction (away from the root
        // for source trees, toward the root for receiver trees); prev[x]
        // the unique edge arriving at x in travel direction.
        let mut next: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
        let mut prev: BTreeMap<VertexId, EdgeId> = BTreeMap::new();
        for edge in edges {
            if edge.tail == edge.head {
                return Err(GraphError::LoopEdge(edge.id));
            }
            let w = weights
                .get(&edge.id)
                .copied()
                .ok_or_else(|| GraphError::UnknownEdge(edge.id.clone(), "the tree weights"))?;
            if !w.is_finite() {
                return Err(GraphError::NonFiniteWeight(edge.id.clone()));
            }
            if w < 0.0 {
                return Err(GraphError::NegativeWeight(edge.id.clone(), w));
            }
            let (from, to) = match orientation {
                Orientation::Source => (edge.tail.clone(), edge.head.clone()),
                Orientation::Receiver => (edge.head.clone(), edge.tail.clone()),
            };
            if prev.insert(to.clone(), edge.id.clone()).is_some() {
                return Err(GraphError::NotATree(
                    root,
                    "a vertex is reached by two tree edges",
                ));
            }
            next.entry(from).or_default().push(edge.id.clone());
            let id = edge.id.clone();
            if edge_map.insert(id.clone(), edge).is_some() {
                return Err(GraphError::DuplicateEdge(id));
            }
        }
        if prev.contains_key(&root) {
            return Err(GraphError::NotATree(root, "an edge arrives at the root"));
        }

        // Walk from the root; every edge must be reachable exactly once.
        let mut paths: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
        let mut leaves: Vec<VertexId> = Vec::new();
        let mut stack: Vec<(VertexId, Vec<EdgeId>)> = alloc::vec![(root.clone(), Vec::new())];
        let mut visited_edges = 0usize;
        while let Some((at, chain)) = stack.pop() {
            match next.get(&at).map(Vec::as_slice) {
                None | Some([]) if at == root => {
                    return Err(GraphError::NotATree(root, "the root has no outgoing edge"))
                }
                None | Some([]) => {
                    leaves.push(at.clone());
                    let travel = match orientation {
                        Orientation::Source => chain,
                        // Stored in travel order leaf->root.
                        Orientation::Receiver => chain.into_iter().rev().collect(),
                    };
                    paths.insert(at, travel);
                }
                Some(out) => {
                    for eid in out {
                        visited_edges += 1;
                        let edge = &edge_map[eid];
                        let to = match orientation {
                            Orientation::Source => edge.head.clone(),
                            Orientation::Receiver => edge.tail.clone(),
                        };
                        let mut chain = chain.clone();
                        chain.push(eid.clone());
                        if chain.len() > edge_map.len() {
                            return Err(GraphError::NotATree(root, "the edges contain a cycle"));
                        }
                        stack.push((to, chain));
                    }
                }
            }
        }
        if visited_edges != edge_map.len() {
            return Err(GraphError::NotATree(
                root,
                "some edges are not reachable from the root",
            ));
        }
        leaves.sort();
        Ok(Tree {
            root,
            orientation,
            edges: edge_map,
            weights,
            leaves,
            paths,
        })
    }

    pub fn root(&self) -> &VertexId {
        &self.root
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Leaves in lexicographic order.
    pub fn leaves(&self) -> &[VertexId] {
        &self.leaves
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edge ids in the tree-local canonical (lexicographic) order.
    pub fn edge_order(&self) -> Vec<EdgeId> {
        self.edges.keys().cloned().collect()
    }

    pub fn weight(&self, id: &str) -> Option<f64> {
        self.weights.get(id).copied()
    }

    pub fn weights(&self) -> &BTreeMap<EdgeId, f64> {
        &self.weights
    }

    pub fn set_weight(&mut self, id: &str, weight: f64) -> Result<(), GraphError> {
        if !weight.is_finite() {
            return Err(GraphError::NonFiniteWeight(id.to_owned()));
        }
        if weight < 0.0 {
            return Err(GraphError::NegativeWeight(id.to_owned(), weight));
        }
        match self.weights.get_mut(id) {
            Some(w) => {
                *w = weight;
                Ok(())
            }
            None => Err(GraphError::UnknownEdge(id.to_owned(), "set_weight")),
        }
    }

    /// Edge chain of the path serving `leaf`, in travel order.
    pub fn path(&self, leaf: &str) -> Option<&[EdgeId]> {
        self.paths.get(leaf).map(Vec::as_slice)
    }

    pub fn path_weight(&self, leaf: &str) -> Result<f64, GraphError> {
        let chain = self
            .path(leaf)
            .ok_or_else(|| GraphError::UnknownPath(self.root.clone(), leaf.to_owned()))?;
        Ok(chain.iter().map(|e| self.weights[e]).sum())
    }

    /// Interior vertices of the leaf's path with their cumulative distance
    /// from the path's starting endpoint (the root for source trees, the
    /// leaf for receiver trees).
    pub fn interior_positions(&self, leaf: &str) -> Result<Vec<(VertexId, f64)>, GraphError> {
        let chain = self
            .path(leaf)
            .ok_or_else(|| GraphError::UnknownPath(self.root.clone(), leaf.to_owned()))?;
        let mut out = Vec::new();
        let mut at = 0.0;
        // Travel order follows edge direction for both orientations (a
        // receiver path runs leaf to root along the edges), so each edge
        // deposits the walk at its head.
        for eid in &chain[..chain.len().saturating_sub(1)] {
            at += self.weights[eid];
            out.push((self.edges[eid].head.clone(), at));
        }
        Ok(out)
    }

    /// Weight of the subpath shared by the two leaves' paths: the common
    /// prefix from the root for source trees, the common suffix into the
    /// root for receiver trees.
    pub fn meet_weight(&self, leaf_a: &str, leaf_b: &str) -> Result<f64, GraphError> {
        let a = self
            .path(leaf_a)
            .ok_or_else(|| GraphError::UnknownPath(self.root.clone(), leaf_a.to_owned()))?;
        let b = self
            .path(leaf_b)
            .ok_or_else(|| GraphError::UnknownPath(self.root.clone(), leaf_b.to_owned()))?;
        let shared: f64 = match self.orientation {
            Orientation::Source => a
                .iter()
                .zip(b.iter())
                .take_while(|(x, y)| x == y)
                .map(|(x, _)| self.weights[x])
                .sum(),
            Orientation::Receiver => a
                .iter()
                .rev()
                .zip(b.iter().rev())
                .take_while(|(x, y)| x == y)
                .map(|(x, _)| self.weights[x])
                .sum(),
        };
        Ok(shared)
    }

    /// The tree as a partial network graph whose boundary is the root plus
    /// the leaves.
    pub fn to_partial_graph(&self) -> PartialNetworkGraph {
        let mut vertices: BTreeSet<VertexId> = BTreeSet::new();
        vertices.insert(self.root.clone());
        for e in self.edges.values() {
            vertices.insert(e.tail.clone());
            vertices.insert(e.head.clone());
        }
        let mut boundary = alloc::vec![self.root.clone()];
        boundary.extend(self.leaves.iter().cloned());
        let paths = self.paths.iter().map(|(leaf, chain)| {
            let pair = match self.orientation {
                Orientation::Source => (self.root.clone(), leaf.clone()),
                Orientation::Receiver => (leaf.clone(), self.root.clone()),
            };
            (pair, chain.clone())
        });
        PartialNetworkGraph::build(
            vertices,
            self.edges
                .values()
                .map(|e| (e.clone(), self.weights[&e.id])),
            boundary,
            paths,
            true,
        )
        .expect("a validated tree is a valid partial network graph")
    }
}
