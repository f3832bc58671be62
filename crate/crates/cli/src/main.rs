use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use netomo::formats::{read_json, write_json, AdjustmentDoc, GraphDoc, PruneDoc, TreesDoc};
use netomo::pipeline::{run_pipeline, write_report, ExperimentConfig};
use netomo::selftest;
use netomo_core::consistency::intrinsic_adjust;
use netomo_core::evalmetric::tm_metrics;
use netomo_core::pruning::{redistribute_after_prune, screen_prune_set};

#[derive(Parser)]
#[command(
    name = "netomo",
    about = "Network tomography experiments: simulate, infer, restore weight consistency, fuse, score"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep experiment from a TOML config and write CSV reports.
    Run {
        /// Experiment description (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for runs.csv and summary.csv.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads; 0 picks one per core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Base seed; every (point, repetition) derives its own stream.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the built-in worked examples and report pass/fail per check.
    Selftest,
    /// Compare an inferred graph against a reference graph.
    Metric {
        /// Reference graph (JSON).
        #[arg(long = "true")]
        true_graph: PathBuf,
        /// Inferred graph (JSON).
        #[arg(long)]
        inferred: PathBuf,
    },
    /// Restore intrinsic consistency of a tree collection.
    Adjust {
        /// Tree collection (JSON).
        #[arg(long)]
        trees: PathBuf,
        /// Where to write the adjustment result (JSON); stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prune edges below a weight factor and redistribute their weight.
    Prune {
        /// Graph to prune (JSON).
        #[arg(long)]
        graph: PathBuf,
        /// Pruning factor: remove edges lighter than delta times the
        /// heaviest weight, where structurally admissible.
        #[arg(long)]
        delta: f64,
        /// Where to write the pruned graph (JSON); stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit<T: serde::Serialize>(out: Option<PathBuf>, value: &T) -> Result<()> {
    match out {
        Some(path) => write_json(&path, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            jobs,
            seed,
        } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("cannot read {}", config.display()))?;
            let config = ExperimentConfig::from_toml(&text)?;
            let report = run_pipeline(&config, jobs, seed)?;
            write_report(&report, &out)?;
            let failures: usize = report.summary.iter().map(|s| s.failures).sum();
            for s in &report.summary {
                println!(
                    "point {:>8}: tm1 {:.4} +- {:.4}, tm2 {:.4} +- {:.4}, failures {}/{}",
                    s.point, s.tm1_mean, s.tm1_std, s.tm2_mean, s.tm2_std, s.failures, s.runs
                );
            }
            println!("report written to {}", out.display());
            Ok(if failures == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Selftest => {
            let checks = selftest::run_all();
            let mut failed = 0;
            for check in &checks {
                let status = if check.passed { "PASS" } else { "FAIL" };
                println!("{status}  {}: {}", check.name, check.detail);
                if !check.passed {
                    failed += 1;
                }
            }
            println!("{} of {} checks passed", checks.len() - failed, checks.len());
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Metric {
            true_graph,
            inferred,
        } => {
            let reference = read_json::<GraphDoc>(&true_graph)?.to_graph()?;
            let candidate = read_json::<GraphDoc>(&inferred)?.to_graph()?;
            let (tm1, tm2) = tm_metrics(&reference, &candidate)?;
            println!("tm1 {tm1}");
            println!("tm2 {tm2}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Adjust { trees, out } => {
            let collection = read_json::<TreesDoc>(&trees)?.to_collection()?;
            let result = intrinsic_adjust(&collection)?;
            emit(out, &AdjustmentDoc::from_result(&result))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Prune { graph, delta, out } => {
            anyhow::ensure!(
                delta > 0.0 && delta <= 1.0,
                "delta must lie in (0, 1], got {delta}"
            );
            let g = read_json::<GraphDoc>(&graph)?.to_graph()?;
            let candidates =
                screen_prune_set(&g, &netomo_core::pruning::edges_below_factor(&g, delta));
            let result = redistribute_after_prune(&g, &candidates, None)?;
            emit(out, &PruneDoc::from_result(&result))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
