//! Core algorithms for restoring consistency of tomographically inferred
//! network graphs.
//!
//! End-to-end measurements between boundary vertices of a partially observed
//! network yield per-path weights and, via covariance of per-window loss
//! series, inferred routing trees. Independently inferred weights are not
//! consistent with each other: the same physical edge can receive different
//! weights in different trees, and path weights need not add up. This crate
//! provides
//!
//! * a partial-network graph model with per-pair routing paths ([`netgraph`]),
//! * dense linear algebra sized for these problems, including a log-barrier
//!   equality/nonnegativity QP solver ([`linsolve`]),
//! * least-squares restoration of path-weight (extrinsic) and tree-asymmetry
//!   (intrinsic) consistency ([`consistency`]),
//! * pruning of topological noise with weight redistribution ([`pruning`]),
//! * covariance-based routing-tree inference ([`inference`]),
//! * fusion of per-root trees into one network ([`fusion`]),
//! * a windowed-loss measurement simulator ([`simulate`]), and
//! * topology/weight agreement metrics between two such graphs
//!   ([`evalmetric`]).
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion CLI
//! crate. Iteration order everywhere is deterministic: vertex and edge ids
//! are opaque strings ordered lexicographically, boundary vertices by their
//! declared order.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod consistency;
pub mod evalmetric;
pub mod fusion;
pub mod inference;
pub mod linsolve;
pub mod netgraph;
pub mod pruning;
pub mod simulate;
