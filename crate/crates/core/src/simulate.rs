//! Random network generation and model-based loss measurements.
//!
//! Networks are built as near-regular random graphs with random routing
//! weights; boundary pairs are routed by shortest path and the routing
//! weights are then discarded. Measurements follow a two-state loss
//! model: each lossy edge alternates between a lossless state and a lossy
//! state with a fixed drop probability, dwelling in each for a Poisson
//! number of averaging windows, and per window a batch of packets is sent
//! along every boundary pair's path, each packet surviving every edge
//! independently.
//!
//! All randomness is drawn from named substreams derived from the
//! configured seed, so results are reproducible and an edge's state trace
//! depends only on (seed, edge id), not on what other edges exist.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use crate::inference::PathSeries;
use crate::netgraph::{
    build_partial_graph, Edge, EdgeId, GraphError, Orientation, PartialNetworkGraph, VertexId,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("no routable connected network found in {0} attempts")]
    Disconnected(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Parameters for network generation and measurement simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Vertices in the underlying graph.
    pub num_vertices: usize,
    /// Vertex degree of the underlying graph.
    pub degree: usize,
    /// Boundary vertices sampled from the underlying graph.
    pub num_boundary: usize,
    /// Mean dwell, in windows, of the lossless state.
    pub gamma_lossless: f64,
    /// Mean dwell, in windows, of the lossy state.
    pub gamma_lossy: f64,
    /// Drop probabilities a lossy edge may take, sampled uniformly.
    pub loss_probabilities: Vec<f64>,
    /// Packets sent per pair per averaging window.
    pub packets_per_window: u32,
    /// Number of averaging windows.
    pub num_windows: usize,
    /// Window length in seconds (metadata carried into the series).
    pub window_len: f64,
    pub seed: u64,
    /// Same routing weight in both directions of every link, which makes
    /// routes symmetric.
    pub symmetric_routing: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            num_vertices: 40,
            degree: 4,
            num_boundary: 6,
            gamma_lossless: 10.0,
            gamma_lossy: 10.0,
            loss_probabilities: vec![0.05, 0.10],
            packets_per_window: 1_000,
            num_windows: 100,
            window_len: 1.0,
            seed: 0,
            symmetric_routing: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.num_vertices < 2 {
            return Err(SimError::InvalidConfig("need at least 2 vertices"));
        }
        if self.degree < 1 || self.degree >= self.num_vertices {
            return Err(SimError::InvalidConfig("degree must be in 1..vertex count"));
        }
        if self.num_boundary < 2 || self.num_boundary > self.num_vertices {
            return Err(SimError::InvalidConfig(
                "boundary count must be in 2..=vertex count",
            ));
        }
        if !(self.gamma_lossless > 0.0 && self.gamma_lossless.is_finite())
            || !(self.gamma_lossy > 0.0 && self.gamma_lossy.is_finite())
        {
            return Err(SimError::InvalidConfig("dwell parameters must be positive"));
        }
        if self.loss_probabilities.is_empty()
            || self
                .loss_probabilities
                .iter()
                .any(|p| !(*p > 0.0 && *p < 1.0))
        {
            return Err(SimError::InvalidConfig(
                "loss probabilities must be a nonempty subset of (0,1)",
            ));
        }
        if self.packets_per_window == 0 {
            return Err(SimError::InvalidConfig("need at least 1 packet per window"));
        }
        if self.num_windows == 0 {
            return Err(SimError::InvalidConfig("need at least 1 window"));
        }
        if !(self.window_len > 0.0 && self.window_len.is_finite()) {
            return Err(SimError::InvalidConfig("window length must be positive"));
        }
        Ok(())
    }
}

// Named substream of the experiment seed: ChaCha12 keyed by the seed and
// two hashes of the label. Any stable derivation works; this one keeps
// every (seed, label) pair independent of all others.
fn substream(seed: u64, label: &str) -> ChaCha12Rng {
    fn fnv1a(bytes: &[u8], basis: u64) -> u64 {
        let mut h = basis;
        for b in bytes {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100_0000_01b3);
        }
        h
    }
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&fnv1a(label.as_bytes(), 0xcbf2_9ce4_8422_2325).to_le_bytes());
    key[16..24].copy_from_slice(&fnv1a(label.as_bytes(), 0x9e37_79b9_7f4a_7c15).to_le_bytes());
    key[24..32].copy_from_slice(&(label.len() as u64).to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

/// A generated network: the routed partial graph (weights all zero until
/// measurements assign them) and its logical subgraph.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedNetwork {
    pub graph: PartialNetworkGraph,
    pub logical: PartialNetworkGraph,
}

const MAX_ATTEMPTS: usize = 50;
const MAX_MATCHINGS: usize = 200;

/// Builds a random routable network.
///
/// The underlying graph is d-regular (by random stub matching); every
/// link carries a directed edge each way with its own uniform routing
/// weight (one shared weight under symmetric routing). Boundary vertices
/// are sampled uniformly and every ordered boundary pair is routed by
/// shortest path, restricted to interior vertices outside the boundary so
/// no boundary vertex is interior to a path. Unroutable or inconsistent
/// samples are retried; after [`MAX_ATTEMPTS`] the error reports failure.
pub fn random_network(config: &SimConfig) -> Result<GeneratedNetwork, SimError> {
    config.validate()?;
    let m = config.num_vertices;
    let d = config.degree;
    if m * d % 2 != 0 {
        return Err(SimError::InvalidConfig(
            "vertex count times degree must be even",
        ));
    }
    let width = (m - 1).max(1).to_string().len();
    let names: Vec<VertexId> = (0..m).map(|i| format!("v{i:0width$}")).collect();

    'attempts: for attempt in 0..MAX_ATTEMPTS {
        let mut topo_rng = substream(config.seed, &format!("topology:{attempt}"));
        let Some(links) = regular_matching(m, d, &mut topo_rng) else {
            continue;
        };
        if !connected(m, &links) {
            continue;
        }

        // Directed edges both ways; weight draws in sorted link order.
        let mut weight_rng = substream(config.seed, &format!("routing:{attempt}"));
        let mut adjacency: Vec<Vec<(usize, EdgeId, f64)>> = vec![Vec::new(); m];
        let mut edges: Vec<(Edge, f64)> = Vec::new();
        for &(u, v) in &links {
            let w_uv: f64 = weight_rng.random();
            let w_vu: f64 = if config.symmetric_routing {
                w_uv
            } else {
                weight_rng.random()
            };
            for (a, b, w) in [(u, v, w_uv), (v, u, w_vu)] {
                let id = format!("{}>{}", names[a], names[b]);
                adjacency[a].push((b, id.clone(), w));
                edges.push((Edge::new(id, names[a].clone(), names[b].clone()), 0.0));
            }
        }

        let mut boundary_rng = substream(config.seed, &format!("boundary:{attempt}"));
        let mut picks: Vec<usize> = (0..m).collect();
        picks.shuffle(&mut boundary_rng);
        let mut chosen: Vec<usize> = picks[..config.num_boundary].to_vec();
        chosen.sort_unstable();
        let boundary: Vec<VertexId> = chosen.iter().map(|i| names[*i].clone()).collect();
        let interior_ok: Vec<bool> = {
            let boundary_set: BTreeSet<usize> = chosen.iter().copied().collect();
            (0..m).map(|i| !boundary_set.contains(&i)).collect()
        };

        let mut paths: BTreeMap<(VertexId, VertexId), Vec<EdgeId>> = BTreeMap::new();
        for &u in &chosen {
            for &v in &chosen {
                if u == v {
                    continue;
                }
                match shortest_path(&adjacency, u, v, &interior_ok) {
                    Some(chain) => {
                        paths.insert((names[u].clone(), names[v].clone()), chain);
                    }
                    None => continue 'attempts,
                }
            }
        }

        let built = build_partial_graph(names.clone(), edges, boundary, paths);
        let Ok(graph) = built else {
            continue;
        };
        let Ok(logical) = graph.logical_subgraph() else {
            continue;
        };
        return Ok(GeneratedNetwork { graph, logical });
    }
    Err(SimError::Disconnected(MAX_ATTEMPTS))
}

// Random d-regular multigraph-free matching: pair up d stubs per vertex,
// rejecting shuffles that produce loops or repeated links.
fn regular_matching(
    m: usize,
    d: usize,
    rng: &mut ChaCha12Rng,
) -> Option<BTreeSet<(usize, usize)>> {
    let mut stubs: Vec<usize> = (0..m).flat_map(|i| core::iter::repeat_n(i, d)).collect();
    'shuffles: for _ in 0..MAX_MATCHINGS {
        stubs.shuffle(rng);
        let mut links = BTreeSet::new();
        for pair in stubs.chunks(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !links.insert((a, b)) {
                continue 'shuffles;
            }
        }
        return Some(links);
    }
    None
}

fn connected(m: usize, links: &BTreeSet<(usize, usize)>) -> bool {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &(a, b) in links {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; m];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(at) = stack.pop() {
        for &next in &adj[at] {
            if !seen[next] {
                seen[next] = true;
                count += 1;
                stack.push(next);
            }
        }
    }
    count == m
}

// Dijkstra from u to v; vertices other than the endpoints are admissible
// only where interior_ok holds. Returns the edge-id chain.
fn shortest_path(
    adjacency: &[Vec<(usize, EdgeId, f64)>],
    u: usize,
    v: usize,
    interior_ok: &[bool],
) -> Option<Vec<EdgeId>> {
    use alloc::collections::BinaryHeap;
    use core::cmp::Reverse;

    #[derive(PartialEq)]
    struct Key(f64, usize);
    impl Eq for Key {}
    impl PartialOrd for Key {
        fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Key {
        fn cmp(&self, other: &Self) -> core::cmp::Ordering {
            self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
        }
    }

    let n = adjacency.len();
    let mut dist: Vec<f64> = vec![f64::INFINITY; n];
    let mut back: Vec<Option<(usize, EdgeId)>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[u] = 0.0;
    heap.push(Reverse(Key(0.0, u)));
    while let Some(Reverse(Key(at_dist, at))) = heap.pop() {
        if at == v {
            break;
        }
        if at_dist > dist[at] {
            continue;
        }
        for (next, id, w) in &adjacency[at] {
            if *next != v && !interior_ok[*next] {
                continue;
            }
            let cand = at_dist + w;
            if cand < dist[*next] {
                dist[*next] = cand;
                back[*next] = Some((at, id.clone()));
                heap.push(Reverse(Key(cand, *next)));
            }
        }
    }
    if dist[v].is_infinite() {
        return None;
    }
    let mut chain = Vec::new();
    let mut at = v;
    while at != u {
        let (prev, id) = back[at].clone().expect("reached vertex has a back edge");
        chain.push(id);
        at = prev;
    }
    chain.reverse();
    Some(chain)
}

/// State schedule of one lossy edge: alternating runs over the whole
/// experiment, each at least one window long.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeStateTrace {
    /// Drop probability while lossy (zero while lossless).
    pub drop_probability: f64,
    /// (lossy?, windows) runs; durations sum to the window count.
    pub runs: Vec<(bool, usize)>,
}

impl EdgeStateTrace {
    /// Per-window lossy indicator.
    pub fn window_states(&self) -> Vec<bool> {
        let mut out = Vec::new();
        for (lossy, len) in &self.runs {
            out.extend(core::iter::repeat_n(*lossy, *len));
        }
        out
    }
}

/// Simulated measurements plus the per-edge ground truth they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    /// One series per ordered boundary pair, in pair order: per-window
    /// received fraction, rooted at the pair's source.
    pub series: Vec<PathSeries>,
    /// State schedules of the lossy edges.
    pub traces: BTreeMap<EdgeId, EdgeStateTrace>,
    /// Per edge: empirical per-window variance of the log survival
    /// weight, the quantity covariance clustering estimates. Zero for
    /// lossless edges.
    pub variance_weights: BTreeMap<EdgeId, f64>,
    /// Per edge: mean per-window drop probability. Zero for lossless
    /// edges.
    pub mean_loss_weights: BTreeMap<EdgeId, f64>,
}

/// Simulates the loss model on the graph's paths.
///
/// A uniformly chosen fraction of edges (rounded down) is lossy; the rest
/// stay lossless throughout, contributing nothing to loss or covariance.
/// Each lossy edge draws its drop probability uniformly from the
/// configured set and alternates states with Poisson dwells clamped to at
/// least one window. Per window and pair, the packet batch is sampled
/// binomially with the product of its path edges' survival probabilities.
pub fn generate_measurements(
    graph: &PartialNetworkGraph,
    config: &SimConfig,
    lossy_fraction: f64,
) -> Result<MeasurementSet, SimError> {
    config.validate()?;
    if !(0.0..=1.0).contains(&lossy_fraction) {
        return Err(SimError::InvalidConfig("lossy fraction must be in [0,1]"));
    }
    let n_windows = config.num_windows;
    let edge_ids = graph.edge_order();

    let mut pick_rng = substream(config.seed, "lossy-selection");
    let mut pool = edge_ids.clone();
    let num_lossy = libm::floor(lossy_fraction * pool.len() as f64) as usize;
    let num_lossy = num_lossy.min(pool.len());
    for i in 0..num_lossy {
        let j = i + pick_rng.random_range(0..pool.len() - i);
        pool.swap(i, j);
    }
    let lossy: BTreeSet<EdgeId> = pool[..num_lossy].iter().cloned().collect();

    let mut traces: BTreeMap<EdgeId, EdgeStateTrace> = BTreeMap::new();
    // Per-edge, per-window survival probability; lossless edges skipped.
    let mut survival: BTreeMap<EdgeId, Vec<f64>> = BTreeMap::new();
    let mut variance_weights: BTreeMap<EdgeId, f64> = BTreeMap::new();
    let mut mean_loss_weights: BTreeMap<EdgeId, f64> = BTreeMap::new();

    for id in &edge_ids {
        if !lossy.contains(id) {
            variance_weights.insert(id.clone(), 0.0);
            mean_loss_weights.insert(id.clone(), 0.0);
            continue;
        }
        let mut rng = substream(config.seed, &format!("trace:{id}"));
        let p = config.loss_probabilities
            [rng.random_range(0..config.loss_probabilities.len())];
        let mut state = rng.random::<bool>();
        let mut runs: Vec<(bool, usize)> = Vec::new();
        let mut remaining = n_windows;
        while remaining > 0 {
            let gamma = if state {
                config.gamma_lossy
            } else {
                config.gamma_lossless
            };
            let draw = Poisson::new(gamma).expect("validated gamma").sample(&mut rng);
            let dwell = (draw as usize).max(1).min(remaining);
            runs.push((state, dwell));
            remaining -= dwell;
            state = !state;
        }
        let trace = EdgeStateTrace {
            drop_probability: p,
            runs,
        };
        let q: Vec<f64> = trace
            .window_states()
            .iter()
            .map(|lossy| if *lossy { 1.0 - p } else { 1.0 })
            .collect();

        let losses: Vec<f64> = q.iter().map(|q| 1.0 - q).collect();
        mean_loss_weights.insert(
            id.clone(),
            losses.iter().sum::<f64>() / n_windows as f64,
        );
        let logs: Vec<f64> = q.iter().map(|q| -libm::log(*q)).collect();
        let mean = logs.iter().sum::<f64>() / n_windows as f64;
        let var = if n_windows > 1 {
            logs.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>()
                / (n_windows - 1) as f64
        } else {
            0.0
        };
        variance_weights.insert(id.clone(), var);
        survival.insert(id.clone(), q);
        traces.insert(id.clone(), trace);
    }

    let mut series = Vec::new();
    let packets = config.packets_per_window as u64;
    for (u, v) in graph.ordered_pairs() {
        let chain = graph.path(&u, &v).expect("ordered pair has a path");
        let lossy_on_path: Vec<&Vec<f64>> =
            chain.iter().filter_map(|e| survival.get(e)).collect();
        let mut rng = substream(config.seed, &format!("packets:{u}>{v}"));
        let mut values = Vec::with_capacity(n_windows);
        for k in 0..n_windows {
            let q: f64 = lossy_on_path.iter().map(|qs| qs[k]).product();
            let received = if q >= 1.0 {
                packets
            } else {
                Binomial::new(packets, q)
                    .expect("survival in [0,1]")
                    .sample(&mut rng)
            };
            values.push(received as f64 / packets as f64);
        }
        series.push(PathSeries {
            root: u,
            leaf: v,
            orientation: Orientation::Source,
            window_len: config.window_len,
            values,
        });
    }

    Ok(MeasurementSet {
        series,
        traces,
        variance_weights,
        mean_loss_weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::{String, ToString};

    fn small_config() -> SimConfig {
        SimConfig {
            num_vertices: 12,
            degree: 4,
            num_boundary: 4,
            num_windows: 50,
            ..SimConfig::default()
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let config = small_config();
        let a = random_network(&config).unwrap();
        let b = random_network(&config).unwrap();
        assert_eq!(a, b);
        let ma = generate_measurements(&a.graph, &config, 0.5).unwrap();
        let mb = generate_measurements(&b.graph, &config, 0.5).unwrap();
        assert_eq!(ma, mb);
    }

    #[test]
    fn generated_graph_is_well_formed() {
        let config = small_config();
        let net = random_network(&config).unwrap();
        assert_eq!(net.graph.boundary().len(), 4);
        // Every ordered pair routed.
        assert_eq!(net.graph.ordered_pairs().len(), 12);
        // Degree-4 graph: 12 * 4 / 2 links, two directed edges each.
        assert_eq!(net.graph.num_edges(), 48);
        assert!(net.logical.num_vertices() <= net.graph.num_vertices());
    }

    #[test]
    fn symmetric_weights_give_symmetric_routes() {
        let config = SimConfig {
            num_vertices: 4,
            degree: 3,
            num_boundary: 3,
            symmetric_routing: true,
            ..SimConfig::default()
        };
        let net = random_network(&config).unwrap();
        for (u, v) in net.graph.ordered_pairs() {
            let forward = net.graph.path_vertices(&u, &v).unwrap();
            let mut backward = net.graph.path_vertices(&v, &u).unwrap();
            backward.reverse();
            assert_eq!(forward, backward, "route {u}->{v}");
        }
    }

    #[test]
    fn asymmetric_weights_produce_an_asymmetric_route() {
        let mut found = false;
        'seeds: for seed in 0..20 {
            let config = SimConfig {
                seed,
                ..small_config()
            };
            let net = random_network(&config).unwrap();
            for (u, v) in net.graph.ordered_pairs() {
                let forward = net.graph.path_vertices(&u, &v).unwrap();
                let mut backward = net.graph.path_vertices(&v, &u).unwrap();
                backward.reverse();
                if forward != backward {
                    found = true;
                    break 'seeds;
                }
            }
        }
        assert!(found, "no asymmetric route over 20 seeds");
    }

    #[test]
    fn no_loss_means_unit_series() {
        let config = small_config();
        let net = random_network(&config).unwrap();
        let set = generate_measurements(&net.graph, &config, 0.0).unwrap();
        assert_eq!(set.traces.len(), 0);
        assert_eq!(set.series.len(), 12);
        for s in &set.series {
            assert!(s.values.iter().all(|v| *v == 1.0));
        }
        assert!(set.variance_weights.values().all(|w| *w == 0.0));
    }

    #[test]
    fn lossy_selection_count_rounds_down() {
        let config = small_config();
        let net = random_network(&config).unwrap();
        let set = generate_measurements(&net.graph, &config, 0.5).unwrap();
        assert_eq!(set.traces.len(), 24);
        let set = generate_measurements(&net.graph, &config, 1.0).unwrap();
        assert_eq!(set.traces.len(), 48);
    }

    #[test]
    fn traces_alternate_and_cover_all_windows() {
        let config = SimConfig {
            num_windows: 137,
            ..small_config()
        };
        let net = random_network(&config).unwrap();
        let set = generate_measurements(&net.graph, &config, 1.0).unwrap();
        for (id, trace) in &set.traces {
            assert!(
                config.loss_probabilities.contains(&trace.drop_probability),
                "{id}: p = {}",
                trace.drop_probability
            );
            let total: usize = trace.runs.iter().map(|(_, d)| d).sum();
            assert_eq!(total, 137, "{id}");
            for pair in trace.runs.windows(2) {
                assert_ne!(pair[0].0, pair[1].0, "{id}: runs must alternate");
                assert!(pair[0].1 >= 1);
            }
        }
    }

    #[test]
    fn fractions_stay_in_unit_interval() {
        let config = small_config();
        let net = random_network(&config).unwrap();
        let set = generate_measurements(&net.graph, &config, 1.0).unwrap();
        for s in &set.series {
            assert_eq!(s.values.len(), 50);
            assert!(s.values.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn state_occupancy_matches_dwell_ratio() {
        // Equal dwell parameters put the lossy occupancy at one half.
        let config = SimConfig {
            num_windows: 20_000,
            ..small_config()
        };
        let net = random_network(&config).unwrap();
        let set = generate_measurements(&net.graph, &config, 1.0).unwrap();
        let mut lossy_windows = 0usize;
        let mut total = 0usize;
        for trace in set.traces.values() {
            for (lossy, len) in &trace.runs {
                if *lossy {
                    lossy_windows += len;
                }
                total += len;
            }
        }
        let occupancy = lossy_windows as f64 / total as f64;
        assert!((occupancy - 0.5).abs() < 0.02, "occupancy {occupancy}");
    }

    // Two paths sharing exactly one lossy edge: the covariance of their
    // log survival series estimates that edge's per-window log-loss
    // variance pi*(1-pi)*ln(1-p)^2.
    #[test]
    fn shared_edge_covariance_matches_closed_form() {
        let vertices = ["a", "b", "c", "x"].map(String::from).to_vec();
        let edges = vec![
            (Edge::new("e1", "a", "x"), 0.0),
            (Edge::new("e2", "c", "x"), 0.0),
            (Edge::new("e3", "x", "b"), 0.0),
        ];
        let boundary = ["a", "b", "c"].map(String::from).to_vec();
        let paths = vec![
            (
                ("a".to_string(), "b".to_string()),
                vec!["e1".to_string(), "e3".to_string()],
            ),
            (
                ("c".to_string(), "b".to_string()),
                vec!["e2".to_string(), "e3".to_string()],
            ),
        ];
        let graph = build_partial_graph(vertices, edges, boundary, paths).unwrap();
        let config = SimConfig {
            num_windows: 20_000,
            loss_probabilities: vec![0.05],
            seed: 42,
            ..SimConfig::default()
        };
        let set = generate_measurements(&graph, &config, 1.0).unwrap();
        let logs: Vec<Vec<f64>> = set
            .series
            .iter()
            .map(|s| s.values.iter().map(|v| -libm::log(*v)).collect())
            .collect();
        let n = 20_000f64;
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / n;
        let (ma, mc) = (mean(&logs[0]), mean(&logs[1]));
        let cov = logs[0]
            .iter()
            .zip(&logs[1])
            .map(|(x, y)| (x - ma) * (y - mc))
            .sum::<f64>()
            / (n - 1.0);
        // Clamping Poisson(gamma) draws at 1 nudges the mean dwell; with
        // equal parameters both states get the same nudge and occupancy
        // stays exactly one half.
        let pi = 0.5;
        let l = -libm::log(1.0 - 0.05);
        let want = pi * (1.0 - pi) * l * l;
        assert!(
            (cov - want).abs() < 2e-4,
            "covariance {cov}, closed form {want}"
        );
    }

    #[test]
    fn traces_depend_only_on_edge_id() {
        // Same edge ids in a larger graph: identical traces.
        let vertices = ["a", "b", "x"].map(String::from).to_vec();
        let edges = vec![
            (Edge::new("e1", "a", "x"), 0.0),
            (Edge::new("e3", "x", "b"), 0.0),
        ];
        let boundary = ["a", "b"].map(String::from).to_vec();
        let paths = vec![(
            ("a".to_string(), "b".to_string()),
            vec!["e1".to_string(), "e3".to_string()],
        )];
        let small = build_partial_graph(vertices, edges, boundary, paths).unwrap();

        let vertices = ["a", "b", "c", "x"].map(String::from).to_vec();
        let edges = vec![
            (Edge::new("e1", "a", "x"), 0.0),
            (Edge::new("e2", "c", "x"), 0.0),
            (Edge::new("e3", "x", "b"), 0.0),
        ];
        let boundary = ["a", "b", "c"].map(String::from).to_vec();
        let paths = vec![
            (
                ("a".to_string(), "b".to_string()),
                vec!["e1".to_string(), "e3".to_string()],
            ),
            (
                ("c".to_string(), "b".to_string()),
                vec!["e2".to_string(), "e3".to_string()],
            ),
        ];
        let large = build_partial_graph(vertices, edges, boundary, paths).unwrap();

        let config = SimConfig::default();
        let a = generate_measurements(&small, &config, 1.0).unwrap();
        let b = generate_measurements(&large, &config, 1.0).unwrap();
        assert_eq!(a.traces["e1"], b.traces["e1"]);
        assert_eq!(a.traces["e3"], b.traces["e3"]);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut config = SimConfig::default();
        config.degree = 40;
        assert!(matches!(
            random_network(&config),
            Err(SimError::InvalidConfig(_))
        ));
        config = SimConfig {
            loss_probabilities: vec![0.0],
            ..SimConfig::default()
        };
        assert!(config.validate().is_err());
        config = SimConfig::default();
        let net = random_network(&config).unwrap();
        assert!(matches!(
            generate_measurements(&net.graph, &config, 1.5),
            Err(SimError::InvalidConfig(_))
        ));
    }
}
