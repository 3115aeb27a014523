//! Graphs, gossip matrices, time-varying graph sequences and mixing operators.

pub mod dump;
pub mod gossip;
pub mod graph;
pub mod mixing;
pub mod node_vector;
pub mod sequence;

pub use gossip::{apply_mixing, gossip_from_laplacian, GossipMatrix};
pub use graph::WeightedGraph;
pub use mixing::{
    chebyshev_mix, measure_chi, multi_stage_complement, multi_stage_mix, ChebyshevMixer,
};
pub use node_vector::NodeVector;
pub use sequence::{
    default_star_partition, random_geometric_sequence, rotating_star_sequence,
    two_star_hop_sequence, GraphSequence, StarPartition, TopologyKind,
};
