//! Tree reconstruction from per-path measurement series by covariance
//! clustering.
//!
//! Paths sharing a subpath from the root experience correlated per-window
//! measurements: the covariance of two leaf series is an unbiased estimate
//! of the shared subpath's weight (in the additive metric carried by the
//! series). Agglomerating the highest-covariance pair repeatedly yields
//! the routing tree, with interior vertices placed at their estimated
//! distance from the root.
//!
//! Merged clusters carry the equal-coefficient average of their member
//! series; by bilinearity the covariance of an averaged series against
//! anything is the average of the member covariances, so the whole
//! procedure runs on the leaf covariance matrix alone
//! ([`reconstruct_tree_from_metric`]) and applies equally to exact shared
//! weights.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::linsolve::Matrix;
use crate::netgraph::{Edge, EdgeId, GraphError, Orientation, Tree, VertexId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InferenceError {
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 windows, got {0}")]
    TooShort(usize),
    #[error("series roots differ: `{0}` vs `{1}`")]
    RootMismatch(VertexId, VertexId),
    #[error("series orientations differ")]
    OrientationMismatch,
    #[error("two series for leaf `{0}`")]
    DuplicateLeaf(VertexId),
    #[error("need at least 2 series, got {0}")]
    TooFewSeries(usize),
    #[error("series contains a non-finite value")]
    NonFiniteValue,
    #[error("metric matrix is not symmetric")]
    AsymmetricMetric,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Per-window measurement series of one boundary-to-boundary path,
/// identified by the tree root it is clustered under.
///
/// For a source tree the root is the path's source and the leaf its
/// receiver; for a receiver tree the root is the receiver. `window_len`
/// is carried as metadata (seconds per averaging window).
#[derive(Debug, Clone, PartialEq)]
pub struct PathSeries {
    pub root: VertexId,
    pub leaf: VertexId,
    pub orientation: Orientation,
    pub window_len: f64,
    pub values: Vec<f64>,
}

/// Unbiased empirical covariance of two aligned series: the estimate of
/// their paths' shared-subpath weight.
pub fn pairwise_shared_metric(s1: &PathSeries, s2: &PathSeries) -> Result<f64, InferenceError> {
    if s1.root != s2.root {
        return Err(InferenceError::RootMismatch(s1.root.clone(), s2.root.clone()));
    }
    if s1.orientation != s2.orientation {
        return Err(InferenceError::OrientationMismatch);
    }
    covariance(&s1.values, &s2.values)
}

fn covariance(x: &[f64], y: &[f64]) -> Result<f64, InferenceError> {
    if x.len() != y.len() {
        return Err(InferenceError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(InferenceError::TooShort(n));
    }
    if !x.iter().chain(y).all(|v| v.is_finite()) {
        return Err(InferenceError::NonFiniteValue);
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let s: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum();
    Ok(s / (n - 1) as f64)
}

/// A reconstructed routing tree together with the clustering metric at
/// which each interior vertex was created (its estimated distance from the
/// root, clamped at zero).
#[derive(Debug, Clone, PartialEq)]
pub struct InferredTree {
    pub tree: Tree,
    pub meet_metric: BTreeMap<VertexId, f64>,
}

/// Clusters measurement series into a routing tree.
///
/// All series must share the root and orientation. See
/// [`reconstruct_tree_from_metric`] for the clustering itself.
pub fn reconstruct_tree(series: &[PathSeries]) -> Result<InferredTree, InferenceError> {
    if series.len() < 2 {
        return Err(InferenceError::TooFewSeries(series.len()));
    }
    let root = &series[0].root;
    let orientation = series[0].orientation;
    let mut leaves = Vec::with_capacity(series.len());
    for s in series {
        if s.root != *root {
            return Err(InferenceError::RootMismatch(root.clone(), s.root.clone()));
        }
        if s.orientation != orientation {
            return Err(InferenceError::OrientationMismatch);
        }
        if leaves.contains(&s.leaf) {
            return Err(InferenceError::DuplicateLeaf(s.leaf.clone()));
        }
        leaves.push(s.leaf.clone());
    }
    let n = series.len();
    let mut metric = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let m = pairwise_shared_metric(&series[i], &series[j])?;
            metric[(i, j)] = m;
            metric[(j, i)] = m;
        }
    }
    reconstruct_tree_from_metric(root.clone(), orientation, leaves, &metric)
}

/// Clusters leaves into a routing tree from their pairwise shared-weight
/// matrix (diagonal = full root-to-leaf weights).
///
/// Repeatedly merges the pair with the largest shared weight, breaking
/// ties toward the lexicographically smallest leaf labels; the merged
/// cluster's shared weight against the rest is the average of its
/// members'. An interior vertex `n1`, `n2`, ... is created per merge at
/// the merge value's distance from the root; the edge above a cluster
/// weighs the distance difference to its parent, clamped at zero.
///
/// When no remaining pair has positive shared weight, the remaining
/// clusters hang directly off the root (fully degenerate input yields a
/// star).
pub fn reconstruct_tree_from_metric(
    root: VertexId,
    orientation: Orientation,
    leaves: Vec<VertexId>,
    metric: &Matrix,
) -> Result<InferredTree, InferenceError> {
    let n = leaves.len();
    if n < 2 {
        return Err(InferenceError::TooFewSeries(n));
    }
    assert_eq!(metric.rows(), n, "metric row count must match leaf count");
    assert_eq!(metric.cols(), n, "metric column count must match leaf count");
    for i in 0..n {
        for j in 0..n {
            if !metric[(i, j)].is_finite() {
                return Err(InferenceError::NonFiniteValue);
            }
            if (metric[(i, j)] - metric[(j, i)]).abs() > 1e-9 * (1.0 + metric[(i, j)].abs()) {
                return Err(InferenceError::AsymmetricMetric);
            }
        }
    }

    struct Cluster {
        label: VertexId,
        vertex: VertexId,
        // Distance of the cluster's vertex from the root, clamped at 0.
        depth: f64,
    }
    let mut clusters: Vec<Cluster> = leaves
        .iter()
        .enumerate()
        .map(|(i, leaf)| Cluster {
            label: leaf.clone(),
            vertex: leaf.clone(),
            depth: metric[(i, i)].max(0.0),
        })
        .collect();
    // Shared weights between active clusters, kept in step with `clusters`.
    let mut shared: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| metric[(i, j)]).collect())
        .collect();

    let mut edges: Vec<(Edge, f64)> = Vec::new();
    let mut meet_metric: BTreeMap<VertexId, f64> = BTreeMap::new();
    let mut interior = 0usize;

    let attach = |parent: &VertexId, child: &Cluster, parent_depth: f64,
                  edges: &mut Vec<(Edge, f64)>| {
        let weight = (child.depth - parent_depth).max(0.0);
        let id: EdgeId = child.vertex.clone();
        let edge = match orientation {
            Orientation::Source => Edge::new(id, parent.clone(), child.vertex.clone()),
            Orientation::Receiver => Edge::new(id, child.vertex.clone(), parent.clone()),
        };
        edges.push((edge, weight));
    };

    while clusters.len() > 1 {
        // Largest shared weight; ties fall to the smallest label pair.
        let mut best: Option<(usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let better = match best {
                    None => true,
                    Some((bi, bj)) => {
                        let (cur, b) = (shared[i][j], shared[bi][bj]);
                        cur > b
                            || (cur == b
                                && pair_key(&clusters[i].label, &clusters[j].label)
                                    < pair_key(&clusters[bi].label, &clusters[bj].label))
                    }
                };
                if better {
                    best = Some((i, j));
                }
            }
        }
        let (i, j) = best.expect("at least two clusters remain");
        if shared[i][j] <= 0.0 {
            break;
        }

        interior += 1;
        let vertex: VertexId = alloc::format!("n{interior}");
        let depth = shared[i][j].max(0.0);
        meet_metric.insert(vertex.clone(), depth);
        attach(&vertex, &clusters[i], depth, &mut edges);
        attach(&vertex, &clusters[j], depth, &mut edges);

        let label = clusters[i].label.clone().min(clusters[j].label.clone());
        // Replace i by the merged cluster, drop j (j > i).
        let merged_row: Vec<f64> = (0..clusters.len())
            .map(|k| 0.5 * (shared[i][k] + shared[j][k]))
            .collect();
        clusters[i] = Cluster {
            label,
            vertex,
            depth,
        };
        for k in 0..clusters.len() {
            shared[i][k] = merged_row[k];
            shared[k][i] = merged_row[k];
        }
        clusters.remove(j);
        shared.remove(j);
        for row in &mut shared {
            row.remove(j);
        }
    }

    for c in &clusters {
        attach(&root, c, 0.0, &mut edges);
    }

    let weights: BTreeMap<EdgeId, f64> = edges
        .iter()
        .map(|(e, w)| (e.id.clone(), *w))
        .collect();
    let tree = Tree::new(
        root,
        orientation,
        edges.into_iter().map(|(e, _)| e).collect(),
        weights,
    )?;
    Ok(InferredTree { tree, meet_metric })
}

fn pair_key<'a>(x: &'a VertexId, y: &'a VertexId) -> (&'a VertexId, &'a VertexId) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::{String, ToString};
    use alloc::vec;

    fn series(root: &str, leaf: &str, values: &[f64]) -> PathSeries {
        PathSeries {
            root: root.to_string(),
            leaf: leaf.to_string(),
            orientation: Orientation::Source,
            window_len: 1.0,
            values: values.to_vec(),
        }
    }

    #[test]
    fn covariance_of_identical_series_is_variance() {
        let s = series("r", "a", &[1.0, 2.0, 3.0, 4.0]);
        let m = pairwise_shared_metric(&s, &s).unwrap();
        // Unbiased variance of 1..4 is 5/3.
        assert!((m - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn covariance_hand_check() {
        let s1 = series("r", "a", &[1.0, 2.0, 3.0]);
        let s2 = series("r", "b", &[2.0, 4.0, 3.0]);
        // Deviations (-1,0,1) and (-1,1,0): sum of products 1, /2 = 0.5.
        let m = pairwise_shared_metric(&s1, &s2).unwrap();
        assert!((m - 0.5).abs() < 1e-12);
    }

    #[test]
    fn covariance_rejects_mismatch() {
        let s1 = series("r", "a", &[1.0, 2.0]);
        let s2 = series("x", "b", &[1.0, 2.0]);
        assert!(matches!(
            pairwise_shared_metric(&s1, &s2),
            Err(InferenceError::RootMismatch(_, _))
        ));
        let s3 = series("r", "b", &[1.0, 2.0, 3.0]);
        assert!(matches!(
            pairwise_shared_metric(&s1, &s3),
            Err(InferenceError::LengthMismatch(2, 3))
        ));
        let s4 = series("r", "b", &[1.0]);
        assert!(matches!(
            pairwise_shared_metric(&s4, &s4),
            Err(InferenceError::TooShort(1))
        ));
    }

    #[test]
    fn two_leaves_meet_at_shared_weight() {
        let metric = Matrix::from_rows(&[&[5.0, 2.0], &[2.0, 7.0]]);
        let inferred = reconstruct_tree_from_metric(
            "r".to_string(),
            Orientation::Source,
            vec!["a".to_string(), "b".to_string()],
            &metric,
        )
        .unwrap();
        let t = &inferred.tree;
        assert_eq!(t.leaves(), ["a".to_string(), "b".to_string()]);
        assert_eq!(t.num_edges(), 3);
        assert!((t.path_weight("a").unwrap() - 5.0).abs() < 1e-12);
        assert!((t.path_weight("b").unwrap() - 7.0).abs() < 1e-12);
        assert!((t.meet_weight("a", "b").unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(inferred.meet_metric["n1"], 2.0);
    }

    #[test]
    fn four_leaf_tree_recovers_exact_metric() {
        // Tree: root -5- x, x -3- y; y serves a (total 10) and b (total 11);
        // x serves c (total 9); root serves d directly (total 4).
        // Shared weights: (a,b)=8, (a,c)=(b,c)=5, (d,*)=0.
        let leaves: Vec<String> = ["a", "b", "c", "d"].map(String::from).to_vec();
        let metric = Matrix::from_rows(&[
            &[10.0, 8.0, 5.0, 0.0],
            &[8.0, 11.0, 5.0, 0.0],
            &[5.0, 5.0, 9.0, 0.0],
            &[0.0, 0.0, 0.0, 4.0],
        ]);
        let inferred = reconstruct_tree_from_metric(
            "r".to_string(),
            Orientation::Source,
            leaves,
            &metric,
        )
        .unwrap();
        let t = &inferred.tree;
        for (x, y, want) in [
            ("a", "b", 8.0),
            ("a", "c", 5.0),
            ("b", "c", 5.0),
            ("a", "d", 0.0),
            ("b", "d", 0.0),
            ("c", "d", 0.0),
        ] {
            assert!(
                (t.meet_weight(x, y).unwrap() - want).abs() < 1e-12,
                "meet({x},{y})"
            );
        }
        for (leaf, want) in [("a", 10.0), ("b", 11.0), ("c", 9.0), ("d", 4.0)] {
            assert!((t.path_weight(leaf).unwrap() - want).abs() < 1e-12);
        }
        // d joins at the root: no positive shared weight remains for it.
        assert_eq!(t.path("d").unwrap().len(), 1);
    }

    #[test]
    fn receiver_orientation_points_edges_at_root() {
        let metric = Matrix::from_rows(&[&[5.0, 2.0], &[2.0, 7.0]]);
        let inferred = reconstruct_tree_from_metric(
            "r".to_string(),
            Orientation::Receiver,
            vec!["a".to_string(), "b".to_string()],
            &metric,
        )
        .unwrap();
        let t = &inferred.tree;
        assert_eq!(t.orientation(), Orientation::Receiver);
        assert!((t.path_weight("a").unwrap() - 5.0).abs() < 1e-12);
        // Edges run leaf -> hub -> root.
        let hub_edge = t.edges().find(|e| e.head == "r").unwrap();
        assert_eq!(hub_edge.tail, "n1");
    }

    #[test]
    fn ties_merge_lexicographically_smallest_pair() {
        // All pairs share exactly 1; merge order must be (a,b), then the
        // merged cluster (label a) with c, then with d.
        let leaves: Vec<String> = ["d", "c", "b", "a"].map(String::from).to_vec();
        let metric = Matrix::from_fn(4, 4, |i, j| if i == j { 3.0 } else { 1.0 });
        let inferred = reconstruct_tree_from_metric(
            "r".to_string(),
            Orientation::Source,
            leaves,
            &metric,
        )
        .unwrap();
        let t = &inferred.tree;
        // a and b meet deepest (n1); later merges stay at depth 1.
        assert!((t.meet_weight("a", "b").unwrap() - 1.0).abs() < 1e-12);
        let path_a = t.path("a").unwrap();
        let path_b = t.path("b").unwrap();
        assert_eq!(path_a[..path_a.len() - 1], path_b[..path_b.len() - 1]);
        assert_eq!(t.num_edges(), 4 + 3);
    }

    #[test]
    fn degenerate_metric_yields_star() {
        let leaves: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        let metric = Matrix::from_fn(3, 3, |i, j| if i == j { 2.0 } else { 0.0 });
        let inferred = reconstruct_tree_from_metric(
            "r".to_string(),
            Orientation::Source,
            leaves,
            &metric,
        )
        .unwrap();
        let t = &inferred.tree;
        assert_eq!(t.num_edges(), 3);
        for leaf in ["a", "b", "c"] {
            assert_eq!(t.path(leaf).unwrap().len(), 1);
            assert!((t.path_weight(leaf).unwrap() - 2.0).abs() < 1e-12);
        }
        assert!(inferred.meet_metric.is_empty());
    }

    #[test]
    fn clustering_from_series_matches_metric_route() {
        // Additive model: each leaf series is the sum of a shared component
        // and a private component, standing in for shared and private path
        // segments.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let n = 4000usize;
        let shared: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0).collect();
        let mk = |rng: &mut rand_chacha::ChaCha12Rng, scale: f64, shared: &[f64]| -> Vec<f64> {
            shared
                .iter()
                .map(|s| s + rng.random::<f64>() * scale)
                .collect()
        };
        let sa = series("r", "a", &mk(&mut rng, 2.0, &shared));
        let sb = series("r", "b", &mk(&mut rng, 3.0, &shared));
        let sc = series("r", "c", &mk(&mut rng, 1.0, &vec![0.0; n]));
        let inferred = reconstruct_tree(&[sa, sb, sc]).unwrap();
        let t = &inferred.tree;
        // a and b share the common component's variance (uniform on [0,4]:
        // 16/12); c is independent of both.
        let want = 16.0 / 12.0;
        let got = t.meet_weight("a", "b").unwrap();
        assert!((got - want).abs() < 0.2, "shared estimate {got}");
        assert!(t.meet_weight("a", "c").unwrap() < 0.15);
        assert!(t.meet_weight("b", "c").unwrap() < 0.15);
    }

    #[test]
    fn permutation_of_series_gives_isomorphic_tree() {
        let leaves: Vec<String> = ["a", "b", "c", "d"].map(String::from).to_vec();
        let metric = Matrix::from_rows(&[
            &[10.0, 8.0, 5.0, 1.0],
            &[8.0, 11.0, 5.0, 1.0],
            &[5.0, 5.0, 9.0, 1.0],
            &[1.0, 1.0, 1.0, 4.0],
        ]);
        let a = reconstruct_tree_from_metric(
            "r".to_string(),
            Orientation::Source,
            leaves.clone(),
            &metric,
        )
        .unwrap();
        let perm = [3usize, 1, 0, 2];
        let leaves_p: Vec<String> = perm.iter().map(|&i| leaves[i].clone()).collect();
        let metric_p = Matrix::from_fn(4, 4, |i, j| metric[(perm[i], perm[j])]);
        let b = reconstruct_tree_from_metric(
            "r".to_string(),
            Orientation::Source,
            leaves_p,
            &metric_p,
        )
        .unwrap();
        for x in ["a", "b", "c", "d"] {
            for y in ["a", "b", "c", "d"] {
                if x < y {
                    let ma = a.tree.meet_weight(x, y).unwrap();
                    let mb = b.tree.meet_weight(x, y).unwrap();
                    assert!((ma - mb).abs() < 1e-12, "meet({x},{y})");
                }
            }
        }
        assert_eq!(a.tree.num_edges(), b.tree.num_edges());
    }
}
