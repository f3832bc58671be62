//! The measurement-to-metrics pipeline and its sweep harness.
//!
//! One run goes: generate a network, sample loss measurements, infer a
//! routing tree per boundary vertex and orientation, prune each tree,
//! restore intrinsic consistency, fuse the trees into a network, prune
//! the fused graph, and score it against the ground truth. A sweep
//! repeats this over one varying axis with per-point repetitions and
//! reports every run plus per-point aggregates.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use netomo_core::consistency::{
    asymmetry_vector, enforce_positivity, intrinsic_adjust, signed_incidence, PositivityMethod,
    TreeCollection,
};
use netomo_core::evalmetric::tm_metrics;
use netomo_core::fusion::fuse_network;
use netomo_core::inference::{reconstruct_tree, PathSeries};
use netomo_core::netgraph::{Orientation, PartialNetworkGraph, Tree};
use netomo_core::pruning::{
    edges_below_factor, redistribute_after_prune, screen_prune_set, select_pruning_factor,
};
use netomo_core::simulate::{generate_measurements, random_network, SimConfig};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Number of averaging windows; values must be positive integers.
    Windows,
    /// Fraction of edges subjected to loss, in [0, 1].
    LossyFraction,
    /// Fixed pruning factor replacing the selection heuristic, in (0, 1].
    PruneDelta,
}

impl SweepAxis {
    fn parse(s: &str) -> Result<SweepAxis> {
        match s {
            "windows" => Ok(SweepAxis::Windows),
            "lossy_fraction" => Ok(SweepAxis::LossyFraction),
            "delta" => Ok(SweepAxis::PruneDelta),
            other => bail!("sweep axis must be windows, lossy_fraction or delta, got `{other}`"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub sim: SimConfig,
    pub sweep: SweepAxis,
    pub values: Vec<f64>,
    pub repetitions: usize,
    pub positivity: PositivityMethod,
    /// Explicit fusion merge tolerance; by default ten times the
    /// intrinsic asymmetry norm left after adjustment.
    pub tau: Option<f64>,
    pub delta_max: f64,
    /// Lossy-edge fraction when that is not the swept axis.
    pub lossy_fraction: f64,
    /// Smoke mode: trees are extracted exactly from a randomly weighted
    /// ground truth, skipping measurement, inference and pruning.
    pub exact_weights: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimTable {
    num_vertices: Option<usize>,
    degree: Option<usize>,
    num_boundary: Option<usize>,
    gamma_lossless: Option<f64>,
    gamma_lossy: Option<f64>,
    loss_probabilities: Option<Vec<f64>>,
    packets_per_window: Option<u32>,
    num_windows: Option<usize>,
    window_len: Option<f64>,
    symmetric_routing: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    sweep: String,
    values: Vec<f64>,
    repetitions: Option<usize>,
    positivity: Option<String>,
    tau: Option<f64>,
    delta_max: Option<f64>,
    lossy_fraction: Option<f64>,
    exact_weights: Option<bool>,
    sim: Option<SimTable>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        let file: ConfigFile = toml::from_str(text).context("invalid experiment config")?;
        let mut sim = SimConfig::default();
        if let Some(t) = file.sim {
            if let Some(v) = t.num_vertices {
                sim.num_vertices = v;
            }
            if let Some(v) = t.degree {
                sim.degree = v;
            }
            if let Some(v) = t.num_boundary {
                sim.num_boundary = v;
            }
            if let Some(v) = t.gamma_lossless {
                sim.gamma_lossless = v;
            }
            if let Some(v) = t.gamma_lossy {
                sim.gamma_lossy = v;
            }
            if let Some(v) = t.loss_probabilities {
                sim.loss_probabilities = v;
            }
            if let Some(v) = t.packets_per_window {
                sim.packets_per_window = v;
            }
            if let Some(v) = t.num_windows {
                sim.num_windows = v;
            }
            if let Some(v) = t.window_len {
                sim.window_len = v;
            }
            if let Some(v) = t.symmetric_routing {
                sim.symmetric_routing = v;
            }
        }
        let positivity = match file.positivity.as_deref() {
            None | Some("barrier") => PositivityMethod::Barrier,
            Some("naive") => PositivityMethod::Naive,
            Some(other) => bail!("positivity must be naive or barrier, got `{other}`"),
        };
        let config = ExperimentConfig {
            sim,
            sweep: SweepAxis::parse(&file.sweep)?,
            values: file.values,
            repetitions: file.repetitions.unwrap_or(50),
            positivity,
            tau: file.tau,
            delta_max: file.delta_max.unwrap_or(0.2),
            lossy_fraction: file.lossy_fraction.unwrap_or(1.0),
            exact_weights: file.exact_weights.unwrap_or(false),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate().context("invalid [sim] table")?;
        if self.values.is_empty() {
            bail!("sweep needs at least one value");
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            bail!("sweep values must be strictly increasing");
        }
        if self.repetitions < 1 {
            bail!("repetitions must be at least 1");
        }
        if !(self.delta_max > 0.0 && self.delta_max <= 1.0) {
            bail!("delta_max must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.lossy_fraction) {
            bail!("lossy_fraction must lie in [0, 1]");
        }
        if let Some(tau) = self.tau {
            if !(tau.is_finite() && tau >= 0.0) {
                bail!("tau must be a nonnegative number");
            }
        }
        match self.sweep {
            SweepAxis::Windows => {
                if self
                    .values
                    .iter()
                    .any(|v| *v < 2.0 || v.fract() != 0.0 || *v > 1e9)
                {
                    bail!("window counts must be integers of at least 2");
                }
            }
            SweepAxis::LossyFraction => {
                if self.values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    bail!("lossy fractions must lie in [0, 1]");
                }
            }
            SweepAxis::PruneDelta => {
                if self.values.iter().any(|v| !(*v > 0.0 && *v <= 1.0)) {
                    bail!("pruning factors must lie in (0, 1]");
                }
            }
        }
        if !self.exact_weights && self.sim.num_boundary < 3 {
            bail!("tree inference needs at least 3 boundary vertices");
        }
        if !self.exact_weights && self.sim.num_windows < 2 {
            bail!("covariance estimation needs at least 2 windows");
        }
        Ok(())
    }
}

/// One pipeline execution. Metric and residual fields are NaN when
/// `error` is set.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub point_index: usize,
    pub point: f64,
    pub rep: usize,
    pub seed: u64,
    pub tm1: f64,
    pub tm2: f64,
    pub intrinsic_residual: f64,
    pub intrinsic_bound: f64,
    pub negative_entries: usize,
    pub tree_delta_mean: f64,
    pub tree_prune_residual_max: f64,
    pub fused_delta: f64,
    pub fused_prune_residual: f64,
    pub tau: f64,
    /// Milliseconds per stage: network, measurements, inference, tree
    /// pruning, intrinsic adjustment, fusion, fused pruning, metric.
    pub stage_ms: [f64; 8],
    pub error: Option<String>,
}

impl RunRecord {
    fn failed(point_index: usize, point: f64, rep: usize, seed: u64, error: String) -> RunRecord {
        RunRecord {
            point_index,
            point,
            rep,
            seed,
            tm1: f64::NAN,
            tm2: f64::NAN,
            intrinsic_residual: f64::NAN,
            intrinsic_bound: f64::NAN,
            negative_entries: 0,
            tree_delta_mean: f64::NAN,
            tree_prune_residual_max: f64::NAN,
            fused_delta: f64::NAN,
            fused_prune_residual: f64::NAN,
            tau: f64::NAN,
            stage_ms: [0.0; 8],
            error: Some(error),
        }
    }
}

/// Per-point aggregate over the successful runs.
#[derive(Debug, Clone)]
pub struct PointSummary {
    pub point: f64,
    pub runs: usize,
    pub failures: usize,
    pub tm1_mean: f64,
    pub tm1_std: f64,
    pub tm2_mean: f64,
    pub tm2_std: f64,
    /// Mean |tm1 - tm2|.
    pub gap_mean: f64,
    pub tree_delta_mean: f64,
    pub fused_delta_mean: f64,
    pub intrinsic_residual_mean: f64,
    pub total_ms_mean: f64,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub runs: Vec<RunRecord>,
    pub summary: Vec<PointSummary>,
}

fn mix_seed(base: u64, point: usize, rep: usize) -> u64 {
    let mut z = base
        .wrapping_add((point as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add((rep as u64).wrapping_mul(0xd1b5_4a32_d192_ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Specializes the base configuration to one sweep point.
fn at_point(config: &ExperimentConfig, value: f64) -> (SimConfig, f64, Option<f64>) {
    let mut sim = config.sim.clone();
    let mut lossy_fraction = config.lossy_fraction;
    let mut delta_override = None;
    match config.sweep {
        SweepAxis::Windows => sim.num_windows = value as usize,
        SweepAxis::LossyFraction => lossy_fraction = value,
        SweepAxis::PruneDelta => delta_override = Some(value),
    }
    (sim, lossy_fraction, delta_override)
}

/// Runs the full sweep on a bounded worker pool (`jobs` = 0 uses the
/// rayon default). Failed runs become records with the error noted.
pub fn run_pipeline(config: &ExperimentConfig, jobs: usize, base_seed: u64) -> Result<Report> {
    config.validate()?;
    let mut tasks = Vec::new();
    for (pi, &value) in config.values.iter().enumerate() {
        for rep in 0..config.repetitions {
            tasks.push((pi, value, rep));
        }
    }
    let worker = |&(pi, value, rep): &(usize, f64, usize)| -> RunRecord {
        let seed = mix_seed(base_seed, pi, rep);
        let (sim, lossy_fraction, delta_override) = at_point(config, value);
        match run_once(config, sim, lossy_fraction, delta_override, seed) {
            Ok(mut record) => {
                record.point_index = pi;
                record.point = value;
                record.rep = rep;
                record
            }
            Err(e) => RunRecord::failed(pi, value, rep, seed, format!("{e:#}")),
        }
    };
    let mut runs: Vec<RunRecord> = if jobs == 1 {
        tasks.iter().map(worker).collect()
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("cannot build worker pool")?;
        pool.install(|| tasks.par_iter().map(worker).collect())
    };
    runs.sort_by(|a, b| (a.point_index, a.rep).cmp(&(b.point_index, b.rep)));
    let summary = summarize(config, &runs);
    Ok(Report { runs, summary })
}

fn summarize(config: &ExperimentConfig, runs: &[RunRecord]) -> Vec<PointSummary> {
    let mean = |xs: &[f64]| {
        if xs.is_empty() {
            f64::NAN
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    let std = |xs: &[f64]| {
        if xs.len() < 2 {
            0.0
        } else {
            let m = mean(xs);
            (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
        }
    };
    config
        .values
        .iter()
        .enumerate()
        .map(|(pi, &value)| {
            let here: Vec<&RunRecord> = runs.iter().filter(|r| r.point_index == pi).collect();
            let ok: Vec<&&RunRecord> = here.iter().filter(|r| r.error.is_none()).collect();
            let col = |f: fn(&RunRecord) -> f64| -> Vec<f64> { ok.iter().map(|r| f(r)).collect() };
            let tm1 = col(|r| r.tm1);
            let tm2 = col(|r| r.tm2);
            let gaps: Vec<f64> = ok.iter().map(|r| (r.tm1 - r.tm2).abs()).collect();
            PointSummary {
                point: value,
                runs: here.len(),
                failures: here.len() - ok.len(),
                tm1_mean: mean(&tm1),
                tm1_std: std(&tm1),
                tm2_mean: mean(&tm2),
                tm2_std: std(&tm2),
                gap_mean: mean(&gaps),
                tree_delta_mean: mean(&col(|r| r.tree_delta_mean)),
                fused_delta_mean: mean(&col(|r| r.fused_delta)),
                intrinsic_residual_mean: mean(&col(|r| r.intrinsic_residual)),
                total_ms_mean: mean(&col(|r| r.stage_ms.iter().sum())),
            }
        })
        .collect()
}

/// Ground truth of a measured run: the base graph weighted by each edge's
/// empirical per-window log-survival variance (zero on lossless edges),
/// contracted to its logical subgraph. This is the quantity covariance
/// clustering estimates.
fn measured_truth(
    graph: &PartialNetworkGraph,
    variance_weights: &BTreeMap<String, f64>,
) -> Result<PartialNetworkGraph> {
    let weights: Vec<f64> = graph
        .edge_order()
        .iter()
        .map(|e| variance_weights.get(e).copied().unwrap_or(0.0))
        .collect();
    Ok(graph.with_weights(&weights)?.logical_subgraph()?)
}

/// Log-survival series for one tree: the pair series of the root in the
/// given orientation, values mapped to -ln(received fraction), floored at
/// half a packet to keep all-loss windows finite.
fn tree_series(
    series: &[PathSeries],
    root: &str,
    orientation: Orientation,
    packets_per_window: u32,
) -> Vec<PathSeries> {
    let floor = 0.5 / packets_per_window as f64;
    series
        .iter()
        .filter(|s| match orientation {
            Orientation::Source => s.root == root,
            Orientation::Receiver => s.leaf == root,
        })
        .map(|s| {
            let (new_root, new_leaf) = match orientation {
                Orientation::Source => (s.root.clone(), s.leaf.clone()),
                Orientation::Receiver => (s.leaf.clone(), s.root.clone()),
            };
            PathSeries {
                root: new_root,
                leaf: new_leaf,
                orientation,
                window_len: s.window_len,
                values: s.values.iter().map(|&q| -(q.max(floor).ln())).collect(),
            }
        })
        .collect()
}

/// Prunes one tree by the factor heuristic (or the fixed override),
/// returning the surviving tree, the factor used and the redistribution
/// residual.
fn prune_tree(
    tree: &Tree,
    delta_max: f64,
    delta_override: Option<f64>,
) -> Result<(Tree, f64, f64)> {
    let graph = tree.to_partial_graph();
    let delta = match delta_override {
        Some(d) => d,
        None => select_pruning_factor(&graph, delta_max)?,
    };
    let (pruned_graph, residual) = if delta > 0.0 {
        let admitted = screen_prune_set(&graph, &edges_below_factor(&graph, delta));
        let result = redistribute_after_prune(&graph, &admitted, None)?;
        (result.graph, result.residual)
    } else {
        (graph, 0.0)
    };
    let (source, receiver) = pruned_graph.extract_trees(tree.root())?;
    let kept = match tree.orientation() {
        Orientation::Source => source,
        Orientation::Receiver => receiver,
    };
    Ok((kept, delta, residual))
}

fn run_once(
    config: &ExperimentConfig,
    sim: SimConfig,
    lossy_fraction: f64,
    delta_override: Option<f64>,
    seed: u64,
) -> Result<RunRecord> {
    let sim = SimConfig { seed, ..sim };
    let mut record = RunRecord::failed(0, 0.0, 0, seed, String::new());
    record.error = None;

    let clock = Instant::now();
    let net = random_network(&sim).context("network generation")?;
    record.stage_ms[0] = clock.elapsed().as_secs_f64() * 1e3;

    // Measurement and inference, or the exact-weights shortcut.
    let (truth, trees) = if config.exact_weights {
        let clock = Instant::now();
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x5bd1_e995_9153_8ea3);
        let weights: Vec<f64> = net
            .graph
            .edge_order()
            .iter()
            .map(|_| rng.random_range(0.5..4.0))
            .collect();
        let truth = net
            .graph
            .with_weights(&weights)?
            .logical_subgraph()
            .context("ground truth contraction")?;
        let trees = TreeCollection::from_graph(&truth).context("exact tree extraction")?;
        record.stage_ms[2] = clock.elapsed().as_secs_f64() * 1e3;
        record.tree_delta_mean = 0.0;
        record.tree_prune_residual_max = 0.0;
        (truth, trees)
    } else {
        let clock = Instant::now();
        let meas = generate_measurements(&net.graph, &sim, lossy_fraction)
            .context("measurement generation")?;
        let truth = measured_truth(&net.graph, &meas.variance_weights)
            .context("ground truth contraction")?;
        record.stage_ms[1] = clock.elapsed().as_secs_f64() * 1e3;

        let clock = Instant::now();
        let mut inferred = Vec::new();
        for root in net.graph.boundary() {
            for orientation in [Orientation::Receiver, Orientation::Source] {
                let series = tree_series(&meas.series, root, orientation, sim.packets_per_window);
                let tree = reconstruct_tree(&series)
                    .with_context(|| format!("inference of the {} tree of {root}", orientation.as_str()))?;
                inferred.push(tree.tree);
            }
        }
        record.stage_ms[2] = clock.elapsed().as_secs_f64() * 1e3;

        let clock = Instant::now();
        let mut pruned = Vec::new();
        let mut deltas = Vec::new();
        let mut max_residual = 0.0_f64;
        for tree in &inferred {
            let (kept, delta, residual) = prune_tree(tree, config.delta_max, delta_override)
                .with_context(|| format!("pruning the {} tree of {}", tree.orientation().as_str(), tree.root()))?;
            deltas.push(delta);
            max_residual = max_residual.max(residual);
            pruned.push(kept);
        }
        record.stage_ms[3] = clock.elapsed().as_secs_f64() * 1e3;
        record.tree_delta_mean = deltas.iter().sum::<f64>() / deltas.len().max(1) as f64;
        record.tree_prune_residual_max = max_residual;

        let trees = TreeCollection::new(net.graph.boundary().to_vec(), pruned)
            .context("pruned trees no longer form a collection")?;
        (truth, trees)
    };

    // Intrinsic consistency, with a sign repair when the projection goes
    // negative (fusion and the later prune assume nonnegative weights).
    let clock = Instant::now();
    let adjustment = intrinsic_adjust(&trees).context("intrinsic adjustment")?;
    record.intrinsic_bound = adjustment.bound.unwrap_or(0.0);
    record.negative_entries = adjustment.negative_entries.len();
    let weights = if adjustment.negative_entries.is_empty() {
        adjustment.weights
    } else {
        let a = signed_incidence(&trees);
        let zeros = vec![0.0; a.rows()];
        enforce_positivity(&a, &trees.weight_vector(), &zeros, config.positivity)
            .context("positivity repair of the intrinsic adjustment")?
            .iter()
            .map(|w| w.max(0.0))
            .collect()
    };
    let adjusted = trees
        .with_weight_vector(&weights)
        .context("reapplying adjusted weights")?;
    record.intrinsic_residual = norm2(&asymmetry_vector(&adjusted));
    record.stage_ms[4] = clock.elapsed().as_secs_f64() * 1e3;

    let clock = Instant::now();
    let tau = config
        .tau
        .unwrap_or_else(|| (10.0 * record.intrinsic_residual).max(1e-6));
    record.tau = tau;
    let fused = fuse_network(&adjusted, tau).context("fusion")?;
    record.stage_ms[5] = clock.elapsed().as_secs_f64() * 1e3;

    let clock = Instant::now();
    let final_graph = if config.exact_weights {
        record.fused_delta = 0.0;
        record.fused_prune_residual = 0.0;
        fused.graph
    } else {
        let delta = match delta_override {
            Some(d) => d,
            None => select_pruning_factor(&fused.graph, config.delta_max)
                .context("fused pruning factor")?,
        };
        record.fused_delta = delta;
        if delta > 0.0 {
            let admitted = screen_prune_set(&fused.graph, &edges_below_factor(&fused.graph, delta));
            let result = redistribute_after_prune(&fused.graph, &admitted, Some(config.positivity))
                .context("fused pruning")?;
            record.fused_prune_residual = result.residual;
            result.graph
        } else {
            record.fused_prune_residual = 0.0;
            fused.graph
        }
    };
    record.stage_ms[6] = clock.elapsed().as_secs_f64() * 1e3;

    let clock = Instant::now();
    let (tm1, tm2) = tm_metrics(&truth, &final_graph).context("metric")?;
    record.tm1 = tm1;
    record.tm2 = tm2;
    record.stage_ms[7] = clock.elapsed().as_secs_f64() * 1e3;
    Ok(record)
}

const RUN_COLUMNS: [&str; 22] = [
    "point_index",
    "point",
    "rep",
    "seed",
    "tm1",
    "tm2",
    "intrinsic_residual",
    "intrinsic_bound",
    "negative_entries",
    "tree_delta_mean",
    "tree_prune_residual_max",
    "fused_delta",
    "fused_prune_residual",
    "tau",
    "ms_network",
    "ms_measure",
    "ms_infer",
    "ms_tree_prune",
    "ms_intrinsic",
    "ms_fuse",
    "ms_fused_prune",
    "ms_metric",
];

/// Writes `runs.csv` and `summary.csv` into the directory.
pub fn write_report(report: &Report, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut w = csv::Writer::from_path(dir.join("runs.csv"))?;
    let mut header: Vec<&str> = RUN_COLUMNS.to_vec();
    header.push("error");
    w.write_record(&header)?;
    for r in &report.runs {
        let mut row = vec![
            r.point_index.to_string(),
            format!("{}", r.point),
            r.rep.to_string(),
            r.seed.to_string(),
            format!("{}", r.tm1),
            format!("{}", r.tm2),
            format!("{}", r.intrinsic_residual),
            format!("{}", r.intrinsic_bound),
            r.negative_entries.to_string(),
            format!("{}", r.tree_delta_mean),
            format!("{}", r.tree_prune_residual_max),
            format!("{}", r.fused_delta),
            format!("{}", r.fused_prune_residual),
            format!("{}", r.tau),
        ];
        row.extend(r.stage_ms.iter().map(|ms| format!("{ms}")));
        row.push(r.error.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    w.write_record([
        "point",
        "runs",
        "failures",
        "tm1_mean",
        "tm1_std",
        "tm2_mean",
        "tm2_std",
        "gap_mean",
        "tree_delta_mean",
        "fused_delta_mean",
        "intrinsic_residual_mean",
        "total_ms_mean",
    ])?;
    for s in &report.summary {
        w.write_record([
            format!("{}", s.point),
            s.runs.to_string(),
            s.failures.to_string(),
            format!("{}", s.tm1_mean),
            format!("{}", s.tm1_std),
            format!("{}", s.tm2_mean),
            format!("{}", s.tm2_std),
            format!("{}", s.gap_mean),
            format!("{}", s.tree_delta_mean),
            format!("{}", s.fused_delta_mean),
            format!("{}", s.intrinsic_residual_mean),
            format!("{}", s.total_ms_mean),
        ])?;
    }
    w.flush()?;
    Ok(())
}
