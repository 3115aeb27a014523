mod common;

use gossipvr::harness::*;
use gossipvr::objectives::{average_gradient, FiniteSumObjective};
use gossipvr::Error;

fn chain_config(dir: &std::path::Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    for (k, v) in [
        ("method", "adom_vr"),
        ("objective", "chain"),
        ("topology", "two_star"),
        ("m", "5"),
        ("n", "2"),
        ("chain_dim", "8"),
        ("budget_iters", "30"),
        ("cadence", "5"),
    ] {
        cfg.set(k, v).unwrap();
    }
    cfg.out = dir.join("chain.csv");
    cfg
}

#[test]
fn fixture_round_trips_through_serializer() {
    let data = common::fixture();
    assert_eq!(data.len(), 500);
    assert_eq!(data.dim, 20);
    assert!(data.labels.iter().all(|&y| y == 1.0 || y == -1.0));
    let again = parse_libsvm_str(&to_libsvm(&data)).unwrap();
    assert_eq!(again, data);
}

#[test]
fn partition_covers_every_row_once() {
    let data = common::fixture();
    let parts = partition_rows(data.len(), 7, 3);
    let mut all: Vec<usize> = parts.concat();
    all.sort_unstable();
    assert_eq!(all, (0..500).collect::<Vec<_>>());
    let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
    assert_eq!(sizes, vec![72, 72, 72, 71, 71, 71, 71]);
}

#[test]
fn logistic_reference_is_self_certifying() {
    let obj = common::logistic(10, 10, 0.1);
    let r = reference_solution(&obj, DEFAULT_TOLERANCE).unwrap();
    let g = average_gradient(&obj, &r.x);
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(norm < 1e-10, "{norm}");
}

#[test]
fn reference_needs_strong_convexity() {
    let obj = common::nlls(5, 2);
    assert_eq!(obj.smoothness().mu, 0.0);
    assert!(matches!(
        reference_solution(&obj, DEFAULT_TOLERANCE),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn chain_experiment_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = chain_config(dir.path());
    let out = run_experiment(&cfg).unwrap();
    let csv = std::fs::read_to_string(&out.csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iter,comms,oracle_calls,dist_sq,grad_norm_sq,consensus_err"
    );
    assert_eq!(lines.count(), 7);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out.json_path).unwrap()).unwrap();
    assert_eq!(meta["status"], "ok");
    assert_eq!(meta["method"], "adom_vr");
    assert!(meta["parameters"]["eta"].as_f64().unwrap() > 0.0);
    assert!(meta["chi"]["measured"].as_f64().unwrap() >= 1.0);
    assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn rerun_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.set("method", "gt_page").unwrap();
    cfg.set("objective", "nlls").unwrap();
    cfg.set("topology", "geometric").unwrap();
    cfg.set("dataset", common::fixture_path().to_str().unwrap())
        .unwrap();
    cfg.set("m", "5").unwrap();
    cfg.set("n", "4").unwrap();
    cfg.set("eta", "0.5").unwrap();
    cfg.set("budget_comms", "200").unwrap();
    cfg.set("seed", "7").unwrap();
    cfg.out = dir.path().join("a.csv");
    run_experiment(&cfg).unwrap();
    let first = std::fs::read(dir.path().join("a.csv")).unwrap();
    let first_meta = std::fs::read(dir.path().join("a.json")).unwrap();
    run_experiment(&cfg).unwrap();
    assert_eq!(first, std::fs::read(dir.path().join("a.csv")).unwrap());
    assert_eq!(
        first_meta,
        std::fs::read(dir.path().join("a.json")).unwrap()
    );
    // unavailable distances are written as NaN
    let text = String::from_utf8(first).unwrap();
    assert!(text.lines().nth(1).unwrap().split(',').nth(3) == Some("NaN"));
}

#[test]
fn every_method_runs_on_logistic() {
    let dir = tempfile::tempdir().unwrap();
    for method in Method::NAMES {
        let mut cfg = ExperimentConfig::default();
        cfg.set("method", method).unwrap();
        cfg.set("dataset", common::fixture_path().to_str().unwrap())
            .unwrap();
        cfg.set("budget_iters", "20").unwrap();
        cfg.set("topology", "complete").unwrap();
        cfg.out = dir.path().join(format!("{method}.csv"));
        let out = run_experiment(&cfg).unwrap();
        let last = out.trace.last();
        assert_eq!(last.iter, 20);
        assert!(last.dist_sq.is_finite());
    }
}

#[test]
fn zero_chain_experiment_respects_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    for (k, v) in [
        ("method", "gt_baseline"),
        ("objective", "zero_chain"),
        ("topology", "rotating_star"),
        ("m", "9"),
        ("n", "4"),
        ("budget_comms", "30"),
        ("budget_oracle", "80"),
    ] {
        cfg.set(k, v).unwrap();
    }
    cfg.out = dir.path().join("z.csv");
    let out = run_experiment(&cfg).unwrap();
    let last = out.trace.last();
    assert!(last.comms >= 30 || last.oracle_calls >= 80);
    assert!(last.dist_sq.is_nan());
}

#[test]
fn config_errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = chain_config(dir.path());
    cfg.objective = ObjectiveKind::Logistic;
    assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    cfg.dataset = Some(dir.path().join("missing.libsvm"));
    assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    let e = ExperimentConfig::parse_text("objective = svm\n").unwrap_err();
    assert!(e.to_string().contains("zero_chain"));
}

#[test]
fn divergent_run_still_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = chain_config(dir.path());
    cfg.method = Method::GtBaseline;
    cfg.eta = Some(100.0);
    cfg.budget_iters = Some(10_000);
    let err = run_experiment(&cfg)
        .err()
        .expect("step far above 2/L diverges");
    assert!(matches!(err, Error::Divergence { .. }));
    let meta = std::fs::read_to_string(dir.path().join("chain.json")).unwrap();
    assert!(meta.contains("diverg") || meta.contains("norm"));
}
