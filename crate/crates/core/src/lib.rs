//! Deterministic parallel multilevel hypergraph partitioning.
//!
//! Results depend only on the input, the configuration and the seed, never
//! on the number of threads or on scheduling.

pub mod coarsening;
pub mod flows;
pub mod generate;
pub mod hash;
pub mod hypergraph;
pub mod initial;
pub mod io;
pub mod jet;
pub mod partitioner;
mod rng;

pub use hypergraph::{BalanceConstraint, Fraction, Hypergraph, HypergraphError, Move, PartitionState, Weight};
pub use partitioner::{partition, Config, ConfigError, PartitionResult, Preset};
