#![allow(dead_code)]

use std::path::PathBuf;

use gossipvr::harness::{parse_libsvm, partition_dataset, Dataset};
use gossipvr::objectives::{
    logistic_objective, nlls_objective, LogisticLoss, NllsOptions, RowObjective, SigmoidSquaresLoss,
};

pub fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic500.libsvm")
}

pub fn fixture() -> Dataset {
    parse_libsvm(fixture_path()).expect("fixture parses")
}

pub fn logistic(m: usize, n: usize, lambda: f64) -> RowObjective<LogisticLoss> {
    let shards = partition_dataset(&fixture(), m, n, 0).unwrap();
    logistic_objective(shards, lambda).unwrap()
}

pub fn nlls(m: usize, n: usize) -> RowObjective<SigmoidSquaresLoss> {
    let shards = partition_dataset(&fixture(), m, n, 0)
        .unwrap()
        .into_iter()
        .map(|s| s.map_labels(|y| if y < 0.0 { 0.0 } else { y }))
        .collect();
    nlls_objective(shards, NllsOptions::default()).unwrap()
}
