//! Experiment harness around `netomo_core`: file formats, the
//! measurement-to-metrics pipeline with sweeps, and runtime self checks.

pub mod formats;
pub mod pipeline;
pub mod selftest;
