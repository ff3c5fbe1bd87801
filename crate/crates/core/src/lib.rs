//! Solver suite for the minimum spanning tree problem with conflicts (MSTC).
//!
//! Given an undirected weighted graph and a set of conflicting edge pairs, the
//! goal is a minimum-weight spanning tree that never contains both edges of a
//! conflicting pair. The crate provides:
//!
//! * [`graph`]: the instance model and graph primitives (union-find, Kruskal,
//!   bridges, max-flow, conflict graphs);
//! * [`preprocess`]: bridge and disconnection based reduction;
//! * [`greedy`]: the independent-set and starting-solution heuristics;
//! * [`lp`]: a bounded dual simplex and the LP relaxations with lazy cuts;
//! * [`bnb`]: an exact branch-and-bound for restricted subproblems;
//! * [`kernel`]: the kernel search matheuristic;
//! * [`io`] and [`bench`]: file formats, exports and the benchmark harness.

pub mod bench;
pub mod bnb;
pub mod error;
pub mod graph;
pub mod greedy;
pub mod io;
pub mod kernel;
pub mod lp;
pub mod oracle;
pub mod preprocess;

pub use error::{Error, Result};
pub use graph::{ConflictGraph, Edge, Instance, Solution};
