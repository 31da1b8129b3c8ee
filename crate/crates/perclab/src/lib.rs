//! A desk-scale laboratory for subcritical Bernoulli bond percolation.
//!
//! The crate is organized around three layers:
//!
//! * sampling and exact queries on finite boxes of `Z^d`
//!   ([`lattice`], [`config`], [`cluster`], [`events`], [`oracle`]),
//! * the convex-analysis layer for the inverse correlation length treated as
//!   an abstract norm, its polar body and the three-point potential
//!   ([`geometry`]),
//! * deterministic cluster-structure algorithms (break points, skeletons)
//!   and the Monte Carlo experiment harnesses built on top of them
//!   ([`renewal`], [`experiments`]).
//!
//! Everything is deterministic given a master seed: edge states come from a
//! counter-based generator keyed by `(seed, trial, edge)`, so results do not
//! depend on thread scheduling or worker count.

pub mod cluster;
pub mod config;
pub mod error;
pub mod events;
pub mod experiments;
pub mod flow;
pub mod geometry;
pub mod lattice;
pub mod oracle;
pub mod renewal;
pub mod rng;

pub use cluster::ClusterPartition;
pub use config::BondConfiguration;
pub use error::{Error, Result};
pub use events::{event_e, event_f, find_junctions, EventSpec};
pub use flow::PathSet;
pub use lattice::{LatticeBox, Site};
