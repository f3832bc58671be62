//! Restoring consistency of inferred edge weights by constrained least
//! squares.
//!
//! Two notions of consistency are handled:
//!
//! * extrinsic: path weights of a graph should match externally given
//!   targets. [`extrinsic_adjust`] finds the weight vector closest to the
//!   current one whose path weights best fit the targets.
//! * intrinsic: a family of independently inferred source and receiver
//!   trees should agree on every boundary-to-boundary weight.
//!   [`intrinsic_adjust`] removes the pairwise asymmetries with the
//!   minimum-norm correction, which never costs more than half the squared
//!   asymmetry norm.
//!
//! Both adjustments may drive individual weights negative;
//! [`enforce_positivity`] restores nonnegativity either by iterative
//! zeroing or by solving the sign-constrained quadratic program exactly.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::linsolve::{
    self, min_norm_least_squares, qr_row_reduce, solve_qp_barrier, IpmOptions, LinError, Matrix,
    QpProblem,
};
use crate::netgraph::{EdgeId, GraphError, Orientation, PartialNetworkGraph, Tree, VertexId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConsistencyError {
    #[error("no target weight for pair ({0}, {1}) and filling is disabled")]
    MissingTarget(VertexId, VertexId),
    #[error("target given for pair ({0}, {1}) which has no path")]
    UnknownPair(VertexId, VertexId),
    #[error("negative target {2} for pair ({0}, {1})")]
    NegativeTarget(VertexId, VertexId, f64),
    #[error("non-finite target for pair ({0}, {1})")]
    NonFiniteTarget(VertexId, VertexId),
    #[error("tree root `{0}` is not in the declared boundary")]
    UnknownRoot(VertexId),
    #[error("two {0} trees rooted at `{1}`")]
    DuplicateTree(&'static str, VertexId),
    #[error("leaf `{1}` of the tree rooted at `{0}` is not a boundary vertex")]
    LeafNotBoundary(VertexId, VertexId),
    #[error(transparent)]
    Lin(#[from] LinError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Desired path weights for the ordered boundary pairs of one graph.
///
/// Pairs without an explicit target are filled with the graph's current
/// path weight when `fill_with_current` is set, and are an error otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetWeights {
    targets: BTreeMap<(VertexId, VertexId), f64>,
    fill_with_current: bool,
}

impl TargetWeights {
    pub fn new(
        targets: impl IntoIterator<Item = ((VertexId, VertexId), f64)>,
        fill_with_current: bool,
    ) -> Result<Self, ConsistencyError> {
        let mut map = BTreeMap::new();
        for ((u, v), t) in targets {
            if !t.is_finite() {
                return Err(ConsistencyError::NonFiniteTarget(u, v));
            }
            if t < 0.0 {
                return Err(ConsistencyError::NegativeTarget(u, v, t));
            }
            map.insert((u, v), t);
        }
        Ok(TargetWeights {
            targets: map,
            fill_with_current,
        })
    }

    /// Target vector in the graph's pair order.
    pub fn filled(&self, graph: &PartialNetworkGraph) -> Result<Vec<f64>, ConsistencyError> {
        for (u, v) in self.targets.keys() {
            if graph.path(u, v).is_none() {
                return Err(ConsistencyError::UnknownPair(u.clone(), v.clone()));
            }
        }
        let mut out = Vec::new();
        for (u, v) in graph.ordered_pairs() {
            match self.targets.get(&(u.clone(), v.clone())) {
                Some(&t) => out.push(t),
                None if self.fill_with_current => out.push(graph.path_weight(&u, &v)?),
                None => return Err(ConsistencyError::MissingTarget(u, v)),
            }
        }
        Ok(out)
    }
}

/// Outcome of a consistency adjustment.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyResult {
    /// Adjusted weights in the canonical edge order of the input.
    pub weights: Vec<f64>,
    /// Remaining `||A w - target||_2` (zero when the system is consistent).
    pub residual: f64,
    /// `||w_adjusted - w||_2`.
    pub adjustment_norm: f64,
    /// For intrinsic adjustments: half the squared asymmetry norm, an upper
    /// bound for the squared adjustment norm.
    pub bound: Option<f64>,
    /// Canonical indices of entries the adjustment drove negative, before
    /// any positivity pass.
    pub negative_entries: Vec<(usize, f64)>,
}

fn negative_entries(weights: &[f64]) -> Vec<(usize, f64)> {
    weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w < 0.0)
        .map(|(i, &w)| (i, w))
        .collect()
}

/// 0/1 matrix mapping edge weights to path weights: row per ordered pair,
/// column per edge, entry 1 iff the edge lies on the pair's path.
pub fn incidence_matrix(
    graph: &PartialNetworkGraph,
) -> (Matrix, Vec<(VertexId, VertexId)>, Vec<EdgeId>) {
    let pairs = graph.ordered_pairs();
    let edges = graph.edge_order();
    let col: BTreeMap<&EdgeId, usize> = edges.iter().zip(0..).collect();
    let mut a = Matrix::zeros(pairs.len(), edges.len());
    for (r, (u, v)) in pairs.iter().enumerate() {
        for eid in graph.path(u, v).expect("pair comes from the graph") {
            a[(r, col[eid])] = 1.0;
        }
    }
    (a, pairs, edges)
}

/// Minimum-norm reweighting toward the target path weights.
///
/// Returns the weight vector closest to the current one among least-squares
/// fits of the target: consistent targets are met exactly, inconsistent
/// ones as closely as the paths allow (the residual field reports the
/// distance).
pub fn extrinsic_adjust(
    graph: &PartialNetworkGraph,
    targets: &TargetWeights,
) -> Result<ConsistencyResult, ConsistencyError> {
    let (a, _, edges) = incidence_matrix(graph);
    let w: Vec<f64> = edges.iter().map(|e| graph.weights()[e]).collect();
    let z = targets.filled(graph)?;
    let aw = a.matvec(&w);
    let eta: Vec<f64> = z.iter().zip(&aw).map(|(t, c)| t - c).collect();
    let delta = min_norm_least_squares(&a, &eta)?;
    let weights: Vec<f64> = w.iter().zip(&delta).map(|(x, d)| x + d).collect();
    let fit = a.matvec(&weights);
    let residual: f64 = linsolve::norm2(
        &fit.iter().zip(&z).map(|(f, t)| f - t).collect::<Vec<_>>(),
    );
    Ok(ConsistencyResult {
        residual,
        adjustment_norm: linsolve::norm2(&delta),
        bound: None,
        negative_entries: negative_entries(&weights),
        weights,
    })
}

/// Identifies one tree in a collection: orientation, root, tree-local edge.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EdgeKey {
    pub orientation: Orientation,
    pub root: VertexId,
    pub edge: EdgeId,
}

/// The source and receiver trees of a set of boundary vertices, with the
/// canonical global edge order used by the intrinsic machinery: all
/// receiver trees first, then all source trees, roots in boundary order,
/// and tree-local edges in lexicographic id order.
///
/// Trees inferred independently own their edges: the same physical link
/// appears once per tree it belongs to, and the whole point of the
/// intrinsic adjustment is to reconcile those copies.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeCollection {
    boundary: Vec<VertexId>,
    receiver: BTreeMap<VertexId, Tree>,
    source: BTreeMap<VertexId, Tree>,
}

impl TreeCollection {
    pub fn new(
        boundary: Vec<VertexId>,
        trees: impl IntoIterator<Item = Tree>,
    ) -> Result<Self, ConsistencyError> {
        let mut receiver = BTreeMap::new();
        let mut source = BTreeMap::new();
        for tree in trees {
            let root = tree.root().clone();
            if !boundary.contains(&root) {
                return Err(ConsistencyError::UnknownRoot(root));
            }
            if let Some(leaf) = tree.leaves().iter().find(|l| !boundary.contains(l)) {
                return Err(ConsistencyError::LeafNotBoundary(root, leaf.clone()));
            }
            let (side, name) = match tree.orientation() {
                Orientation::Receiver => (&mut receiver, "receiver"),
                Orientation::Source => (&mut source, "source"),
            };
            if side.insert(root.clone(), tree).is_some() {
                return Err(ConsistencyError::DuplicateTree(name, root));
            }
        }
        Ok(TreeCollection {
            boundary,
            receiver,
            source,
        })
    }

    /// Extracts both trees of every boundary vertex of a graph.
    pub fn from_graph(graph: &PartialNetworkGraph) -> Result<Self, ConsistencyError> {
        let mut trees = Vec::new();
        for b in graph.boundary() {
            let (s, r) = graph.extract_trees(b)?;
            trees.push(s);
            trees.push(r);
        }
        TreeCollection::new(graph.boundary().to_vec(), trees)
    }

    pub fn boundary(&self) -> &[VertexId] {
        &self.boundary
    }

    pub fn receiver_tree(&self, root: &str) -> Option<&Tree> {
        self.receiver.get(root)
    }

    pub fn source_tree(&self, root: &str) -> Option<&Tree> {
        self.source.get(root)
    }

    /// Trees in the canonical order.
    pub fn trees(&self) -> impl Iterator<Item = &Tree> {
        let receivers = self
            .boundary
            .iter()
            .filter_map(move |b| self.receiver.get(b));
        let sources = self.boundary.iter().filter_map(move |b| self.source.get(b));
        receivers.chain(sources)
    }

    /// Global edge keys in the canonical order.
    pub fn edge_index(&self) -> Vec<EdgeKey> {
        let mut out = Vec::new();
        for tree in self.trees() {
            for edge in tree.edge_order() {
                out.push(EdgeKey {
                    orientation: tree.orientation(),
                    root: tree.root().clone(),
                    edge,
                });
            }
        }
        out
    }

    /// Weights in the canonical order.
    pub fn weight_vector(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for tree in self.trees() {
            for edge in tree.edge_order() {
                out.push(tree.weight(&edge).expect("edge order comes from the tree"));
            }
        }
        out
    }

    /// Same collection with all weights replaced, in the canonical order.
    /// Weights must be nonnegative; run a positivity pass first if an
    /// adjustment went negative.
    pub fn with_weight_vector(&self, weights: &[f64]) -> Result<Self, ConsistencyError> {
        assert_eq!(
            weights.len(),
            self.edge_index().len(),
            "weight vector length must match the edge count"
        );
        let mut out = self.clone();
        let mut i = 0;
        for side in [Orientation::Receiver, Orientation::Source] {
            for b in out.boundary.clone() {
                let tree = match side {
                    Orientation::Receiver => out.receiver.get_mut(&b),
                    Orientation::Source => out.source.get_mut(&b),
                };
                let Some(tree) = tree else { continue };
                for edge in tree.edge_order() {
                    tree.set_weight(&edge, weights[i])?;
                    i += 1;
                }
            }
        }
        Ok(out)
    }

    /// Ordered pairs (v, u) for which both the source tree of v and the
    /// receiver tree of u carry the path v to u, source-major in boundary
    /// order. These index the rows of the signed incidence matrix.
    pub fn ordered_pairs(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for v in &self.boundary {
            for u in &self.boundary {
                if v == u {
                    continue;
                }
                let have_source = self
                    .source
                    .get(v)
                    .is_some_and(|t| t.path(u).is_some());
                let have_receiver = self
                    .receiver
                    .get(u)
                    .is_some_and(|t| t.path(v).is_some());
                if have_source && have_receiver {
                    out.push((v.clone(), u.clone()));
                }
            }
        }
        out
    }
}

/// Signed incidence matrix of a tree collection: row per ordered pair
/// (v, u), column per global edge; +1 on the edges the receiver tree of u
/// uses for the path from v, -1 on the edges the source tree of v uses for
/// the path to u.
pub fn signed_incidence(trees: &TreeCollection) -> Matrix {
    let index = trees.edge_index();
    let col: BTreeMap<&EdgeKey, usize> = index.iter().zip(0..).collect();
    let pairs = trees.ordered_pairs();
    let mut a = Matrix::zeros(pairs.len(), index.len());
    for (r, (v, u)) in pairs.iter().enumerate() {
        let receiver = trees.receiver_tree(u).expect("pair implies tree");
        for edge in receiver.path(v).expect("pair implies path") {
            let key = EdgeKey {
                orientation: Orientation::Receiver,
                root: u.clone(),
                edge: edge.clone(),
            };
            a[(r, col[&key])] = 1.0;
        }
        let source = trees.source_tree(v).expect("pair implies tree");
        for edge in source.path(u).expect("pair implies path") {
            let key = EdgeKey {
                orientation: Orientation::Source,
                root: v.clone(),
                edge: edge.clone(),
            };
            a[(r, col[&key])] = -1.0;
        }
    }
    a
}

/// Per-pair asymmetry: receiver-tree path weight minus source-tree path
/// weight, in the row order of [`signed_incidence`].
pub fn asymmetry_vector(trees: &TreeCollection) -> Vec<f64> {
    trees
        .ordered_pairs()
        .iter()
        .map(|(v, u)| {
            let r = trees
                .receiver_tree(u)
                .and_then(|t| t.path_weight(v).ok())
                .expect("pair implies path");
            let s = trees
                .source_tree(v)
                .and_then(|t| t.path_weight(u).ok())
                .expect("pair implies path");
            r - s
        })
        .collect()
}

/// Minimum-norm reweighting that zeroes every pairwise asymmetry.
///
/// The correction is `A^T (A A^T)^{-1} A w` with A the signed incidence
/// matrix; `A A^T` is positive definite for any valid collection, and the
/// squared correction norm is at most `||A w||^2 / 2` (its smallest
/// eigenvalue is at least 2).
pub fn intrinsic_adjust(trees: &TreeCollection) -> Result<ConsistencyResult, ConsistencyError> {
    let w = trees.weight_vector();
    let a = signed_incidence(trees);
    if a.rows() == 0 {
        return Ok(ConsistencyResult {
            weights: w,
            residual: 0.0,
            adjustment_norm: 0.0,
            bound: Some(0.0),
            negative_entries: Vec::new(),
        });
    }
    let aw = a.matvec(&w);
    let gram = a.gram_rows();
    let chol = linsolve::cholesky_decompose(&gram)?;
    let y = linsolve::cholesky_solve(&chol, &aw);
    let delta = a.tr_matvec(&y);
    let weights: Vec<f64> = w.iter().zip(&delta).map(|(x, d)| x - d).collect();
    let residual = linsolve::norm2(&a.matvec(&weights));
    let bound = 0.5 * aw.iter().map(|v| v * v).sum::<f64>();
    let adjustment_norm = linsolve::norm2(&delta);
    debug_assert!(
        adjustment_norm * adjustment_norm <= bound * (1.0 + 1e-9) + 1e-18,
        "adjustment exceeded the half-asymmetry bound"
    );
    Ok(ConsistencyResult {
        residual,
        adjustment_norm,
        bound: Some(bound),
        negative_entries: negative_entries(&weights),
        weights,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositivityMethod {
    /// Iteratively zero negative entries and re-solve on the rest. Fast,
    /// not optimal.
    Naive,
    /// Exact sign-constrained quadratic program via the interior-point
    /// solver.
    Barrier,
}

/// Finds nonnegative weights fitting `a x ~ target` while staying close to
/// `w`.
///
/// Inconsistent targets are projected onto the reachable set first, so the
/// constraint is always the least-squares fit. `Naive` zeroes negative
/// entries of the unconstrained solution and re-solves until none remain;
/// `Barrier` solves min ||x - w||^2 subject to the fit and x >= 0 exactly.
pub fn enforce_positivity(
    a: &Matrix,
    w: &[f64],
    target: &[f64],
    method: PositivityMethod,
) -> Result<Vec<f64>, ConsistencyError> {
    assert_eq!(a.cols(), w.len(), "weight length must match column count");
    assert_eq!(a.rows(), target.len(), "target length must match row count");
    match method {
        PositivityMethod::Naive => naive_positivity(a, w, target),
        PositivityMethod::Barrier => barrier_positivity(a, w, target),
    }
}

fn naive_positivity(
    a: &Matrix,
    w: &[f64],
    target: &[f64],
) -> Result<Vec<f64>, ConsistencyError> {
    let n = a.cols();
    let mut fixed = alloc::vec![false; n];
    // Each pass zeroes at least one more entry, so n passes suffice.
    for _ in 0..=n {
        let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
        let mut x = alloc::vec![0.0; n];
        if !free.is_empty() {
            let mut sub = Matrix::zeros(a.rows(), free.len());
            for r in 0..a.rows() {
                for (c, &i) in free.iter().enumerate() {
                    sub[(r, c)] = a[(r, i)];
                }
            }
            let fit_gap: Vec<f64> = {
                let wf: Vec<f64> = free.iter().map(|&i| w[i]).collect();
                let awf = sub.matvec(&wf);
                target.iter().zip(&awf).map(|(t, c)| t - c).collect()
            };
            let delta = min_norm_least_squares(&sub, &fit_gap)?;
            for (c, &i) in free.iter().enumerate() {
                x[i] = w[i] + delta[c];
            }
        }
        let mut any_negative = false;
        for i in 0..n {
            if x[i] < 0.0 {
                fixed[i] = true;
                any_negative = true;
            }
        }
        if !any_negative {
            return Ok(x);
        }
    }
    unreachable!("each pass fixes at least one entry")
}

fn barrier_positivity(
    a: &Matrix,
    w: &[f64],
    target: &[f64],
) -> Result<Vec<f64>, ConsistencyError> {
    let n = a.cols();
    // Project the target onto the reachable set, then drop dependent rows
    // so the equality block has full row rank.
    let aw = a.matvec(w);
    let eta: Vec<f64> = target.iter().zip(&aw).map(|(t, c)| t - c).collect();
    let delta = min_norm_least_squares(a, &eta)?;
    let ls: Vec<f64> = w.iter().zip(&delta).map(|(x, d)| x + d).collect();
    let feasible_target = a.matvec(&ls);
    let reduced = qr_row_reduce(a, &feasible_target)?;
    if reduced.rank == 0 {
        // No effective constraints: the closest nonnegative point clamps.
        return Ok(w.iter().map(|&x| x.max(0.0)).collect());
    }
    let mut h = Matrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = 2.0;
    }
    let c: Vec<f64> = w.iter().map(|&x| -2.0 * x).collect();
    let problem = QpProblem::new(h, c, reduced.matrix, reduced.rhs)?;
    let solution = solve_qp_barrier(&problem, &IpmOptions::default())?;
    Ok(solution.x().to_vec())
}
