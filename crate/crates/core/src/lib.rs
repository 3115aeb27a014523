//! Decentralized finite-sum optimization over time-varying networks.
//!
//! * [`network`]: graphs, gossip matrices, graph sequences, mixing operators
//! * [`objectives`]: finite-sum objectives and their smoothness constants
//! * [`hardinstances`]: lower-bound constructions
//! * [`optimizers`]: ADOM+VR, GT-PAGE, gradient tracking and the run loop
//! * [`harness`]: data loading, reference solutions and experiment runs

pub mod error;
pub mod hardinstances;
pub mod harness;
pub mod network;
pub mod objectives;
pub mod optimizers;
pub mod rng;

pub use error::{Error, Result};
pub use network::{GossipMatrix, GraphSequence, NodeVector, WeightedGraph};
pub use objectives::{FiniteSumObjective, SmoothnessInfo};
pub use optimizers::{run, Budgets, MethodSpec, Optimizer, RunTrace, TraceRecord};
