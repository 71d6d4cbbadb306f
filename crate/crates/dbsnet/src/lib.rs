//! Network-planning toolkit for drone base stations with a wireless
//! optical backhaul mesh.
//!
//! The pipeline has four stages:
//!
//! 1. [`scenario`] — generate ground-node instances from a Poisson cluster
//!    process and place gateway macro stations.
//! 2. [`channel`] — access-layer path-loss model (ground node ↔ drone) and
//!    the FSO link-rate model (station ↔ station).
//! 3. [`clustering`] — constrained agglomerative hierarchical clustering
//!    that picks drone count and positions, plus a K-means++ baseline.
//! 4. [`dnp`] — the backhaul chain-partition problem: graph construction,
//!    genome encoding, fitness evaluation, and the genetic algorithm with
//!    exact baselines.
//!
//! [`harness`] wires the stages into seeded experiment sweeps emitting CSV
//! and JSON metrics; the `plan` binary exposes them on the command line.

pub mod channel;
pub mod clustering;
pub mod dnp;
pub mod error;
pub mod harness;
pub mod rng;
pub mod scenario;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
