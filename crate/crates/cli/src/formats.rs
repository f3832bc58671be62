//! On-disk interchange formats.
//!
//! Graphs and tree collections travel as JSON documents, measurement
//! series as CSV. The graph document is the interchange for every
//! subcommand; inferred and fused graphs may violate the shared-subpath
//! rule before pruning, so reading uses the relaxed constructor.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use netomo_core::consistency::{ConsistencyResult, TreeCollection};
use netomo_core::fusion::FusedGraph;
use netomo_core::inference::PathSeries;
use netomo_core::netgraph::{
    build_partial_graph_relaxed, Edge, Orientation, PartialNetworkGraph, Tree,
};
use netomo_core::pruning::PruneResult;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub weight: f64,
}

/// Graph document: `paths` maps "source>receiver" to an edge-id chain;
/// `provenance`, present on fused graphs, maps an interior vertex to the
/// tree vertices merged into it ("orientation:root:local").
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
    pub boundary: Vec<String>,
    pub paths: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, Vec<String>>,
}

impl GraphDoc {
    pub fn from_graph(graph: &PartialNetworkGraph) -> GraphDoc {
        let (vertices, edges, boundary, paths) = graph.clone().into_parts();
        GraphDoc {
            vertices,
            edges: edges
                .into_iter()
                .map(|(e, weight)| EdgeDoc {
                    id: e.id,
                    tail: e.tail,
                    head: e.head,
                    weight,
                })
                .collect(),
            boundary,
            paths: paths
                .into_iter()
                .map(|((u, v), chain)| (format!("{u}>{v}"), chain))
                .collect(),
            provenance: BTreeMap::new(),
        }
    }

    pub fn from_fused(fused: &FusedGraph) -> GraphDoc {
        let mut doc = GraphDoc::from_graph(&fused.graph);
        doc.provenance = fused
            .provenance
            .iter()
            .map(|(vertex, refs)| {
                let names = refs
                    .iter()
                    .map(|(o, root, local)| format!("{}:{root}:{local}", o.as_str()))
                    .collect();
                (vertex.clone(), names)
            })
            .collect();
        doc
    }

    pub fn to_graph(&self) -> Result<PartialNetworkGraph> {
        let mut paths = Vec::with_capacity(self.paths.len());
        for (key, chain) in &self.paths {
            let Some((u, v)) = key.split_once('>') else {
                bail!("path key `{key}` is not of the form source>receiver");
            };
            paths.push(((u.to_string(), v.to_string()), chain.clone()));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| (Edge::new(&*e.id, &*e.tail, &*e.head), e.weight));
        build_partial_graph_relaxed(self.vertices.clone(), edges, self.boundary.clone(), paths)
            .context("graph document is not a valid partial network graph")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeDoc {
    pub root: String,
    /// "source" or "receiver".
    pub orientation: String,
    pub edges: Vec<EdgeDoc>,
}

/// A collection of routing trees over one boundary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreesDoc {
    pub boundary: Vec<String>,
    pub trees: Vec<TreeDoc>,
}

fn parse_orientation(s: &str) -> Result<Orientation> {
    match s {
        "source" => Ok(Orientation::Source),
        "receiver" => Ok(Orientation::Receiver),
        other => bail!("orientation must be `source` or `receiver`, got `{other}`"),
    }
}

impl TreesDoc {
    pub fn from_collection(trees: &TreeCollection) -> TreesDoc {
        TreesDoc {
            boundary: trees.boundary().to_vec(),
            trees: trees
                .trees()
                .map(|tree| TreeDoc {
                    root: tree.root().clone(),
                    orientation: tree.orientation().as_str().to_string(),
                    edges: tree
                        .edge_order()
                        .into_iter()
                        .map(|id| {
                            let e = tree
                                .edges()
                                .find(|e| e.id == id)
                                .expect("edge order lists existing edges");
                            EdgeDoc {
                                id: e.id.clone(),
                                tail: e.tail.clone(),
                                head: e.head.clone(),
                                weight: tree.weights()[&e.id],
                            }
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_collection(&self) -> Result<TreeCollection> {
        let mut trees = Vec::with_capacity(self.trees.len());
        for doc in &self.trees {
            let orientation = parse_orientation(&doc.orientation)?;
            let edges: Vec<Edge> = doc
                .edges
                .iter()
                .map(|e| Edge::new(&*e.id, &*e.tail, &*e.head))
                .collect();
            let weights: BTreeMap<String, f64> =
                doc.edges.iter().map(|e| (e.id.clone(), e.weight)).collect();
            let tree = Tree::new(doc.root.clone(), orientation, edges, weights)
                .with_context(|| format!("tree rooted at `{}` is malformed", doc.root))?;
            trees.push(tree);
        }
        TreeCollection::new(self.boundary.clone(), trees)
            .context("trees do not form a collection over the given boundary")
    }
}

/// Report of a consistency adjustment, mirroring the in-process result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdjustmentDoc {
    pub weights: Vec<f64>,
    pub residual: f64,
    pub adjustment_norm: f64,
    pub bound: Option<f64>,
    pub negative_entries: Vec<(usize, f64)>,
}

impl AdjustmentDoc {
    pub fn from_result(r: &ConsistencyResult) -> AdjustmentDoc {
        AdjustmentDoc {
            weights: r.weights.clone(),
            residual: r.residual,
            adjustment_norm: r.adjustment_norm,
            bound: r.bound,
            negative_entries: r.negative_entries.clone(),
        }
    }
}

/// Report of a prune-and-redistribute step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PruneDoc {
    pub graph: GraphDoc,
    pub weights: Vec<f64>,
    pub residual: f64,
    pub pruned: Vec<(String, f64)>,
    pub negative_entries: Vec<(String, f64)>,
}

impl PruneDoc {
    pub fn from_result(r: &PruneResult) -> PruneDoc {
        PruneDoc {
            graph: GraphDoc::from_graph(&r.graph),
            weights: r.weights.clone(),
            residual: r.residual,
            pruned: r.pruned.clone(),
            negative_entries: r.negative_entries.clone(),
        }
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes series as CSV rows `root,leaf,orientation,t_a,value`, one row
/// per averaging window, windows in order.
pub fn write_series_csv(path: &Path, series: &[PathSeries]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(["root", "leaf", "orientation", "t_a", "value"])?;
    for s in series {
        for (i, v) in s.values.iter().enumerate() {
            w.write_record([
                s.root.as_str(),
                s.leaf.as_str(),
                s.orientation.as_str(),
                &format!("{}", i as f64 * s.window_len),
                &format!("{v}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads series CSV written by [`write_series_csv`]: rows group by
/// (root, leaf, orientation) in first-appearance order; the window length
/// is recovered from the first two t_a values of a group (1.0 for
/// single-window series).
pub fn read_series_csv(path: &Path) -> Result<Vec<PathSeries>> {
    let mut r = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut order: Vec<(String, String, Orientation)> = Vec::new();
    let mut groups: BTreeMap<(String, String, Orientation), (Vec<f64>, Vec<f64>)> =
        BTreeMap::new();
    for record in r.records() {
        let record = record?;
        if record.len() != 5 {
            bail!("series row must have 5 fields, got {}", record.len());
        }
        let key = (
            record[0].to_string(),
            record[1].to_string(),
            parse_orientation(&record[2])?,
        );
        let t: f64 = record[3].parse().context("t_a must be a number")?;
        let v: f64 = record[4].parse().context("value must be a number")?;
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        let entry = groups.entry(key).or_default();
        entry.0.push(t);
        entry.1.push(v);
    }
    let mut out = Vec::with_capacity(order.len());
    for key in order {
        let (times, values) = groups.remove(&key).expect("grouped above");
        let window_len = if times.len() >= 2 {
            times[1] - times[0]
        } else {
            1.0
        };
        if window_len <= 0.0 {
            bail!("t_a values of a series must be strictly increasing");
        }
        out.push(PathSeries {
            root: key.0,
            leaf: key.1,
            orientation: key.2,
            window_len,
            values,
        });
    }
    Ok(out)
}
