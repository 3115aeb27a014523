//! Data ingestion, partitioning, reference solutions and experiment runs.

mod config;
mod experiment;
mod libsvm;
mod partition;
mod reference;

pub use config::{ExperimentConfig, Method, ObjectiveKind, Topology, KEYS};
pub use experiment::{
    build_sequence, config_digest, prepare, run_experiment, write_trace_csv, ExperimentOutput,
    Prepared,
};
pub use libsvm::{parse_libsvm, parse_libsvm_str, to_libsvm, Dataset};
pub use partition::{partition_dataset, partition_rows};
pub use reference::{reference_solution, ReferenceSolution, DEFAULT_TOLERANCE, MAX_ITERATIONS};
