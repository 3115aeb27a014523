use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gossipvr"));
    c.env_remove("RUST_BACKTRACE");
    c
}

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/synthetic500.libsvm")
}

#[test]
fn run_from_config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(
        &cfg,
        format!(
            "# logistic on the fixture\nmethod = gt_page\ndataset = {}\nbudget_iters = 40\ntopology = ring\n",
            fixture().display()
        ),
    )
    .unwrap();
    let out = dir.path().join("trace.csv");
    let status = bin()
        .arg("run")
        .arg(&cfg)
        .args(["--method", "adom_vr", "--m", "5", "--n", "8", "--seed", "3"])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("trace.json")).unwrap())
            .unwrap();
    assert_eq!(meta["method"], "adom_vr");
    assert_eq!(meta["seed"], 3);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 42);
}

#[test]
fn parallel_seeds_match_serial_runs() {
    let dir = tempfile::tempdir().unwrap();
    let common = |sub: &str, jobs: &str| {
        let out = dir.path().join(sub);
        std::fs::create_dir_all(&out).unwrap();
        let status = bin()
            .args(["run", "--method", "gt_baseline", "--budget-comms", "30"])
            .arg("--dataset")
            .arg(fixture())
            .args(["--seeds", "1,2,3", "--jobs", jobs])
            .arg("--out")
            .arg(out.join("t.csv"))
            .output()
            .unwrap();
        assert!(status.status.success());
        out
    };
    let serial = common("serial", "1");
    let parallel = common("parallel", "3");
    for seed in 1..=3 {
        let name = format!("t_seed{seed}.csv");
        assert_eq!(
            std::fs::read(serial.join(&name)).unwrap(),
            std::fs::read(parallel.join(&name)).unwrap()
        );
    }
}

#[test]
fn bad_config_exits_nonzero() {
    let out = bin()
        .args(["run", "--method", "sgd", "--set", "budget_iters=5"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gt_page"), "{err}");

    let out = bin()
        .args(["run", "--set", "budget_iters"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn dump_graphs_replays_as_topology() {
    let dir = tempfile::tempdir().unwrap();
    let graphs = dir.path().join("graphs.txt");
    let status = bin()
        .args([
            "dump-graphs",
            "--m",
            "6",
            "--set",
            "topology=two_star",
            "--steps",
            "20",
        ])
        .arg("--out")
        .arg(&graphs)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&graphs).unwrap();
    assert!(text.starts_with("m 6"));

    let out = bin()
        .args(["measure-chi", "--m", "6", "--set", "topology=replay"])
        .arg("--set")
        .arg(format!("graphs={}", graphs.display()))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let value = |key: &str| -> f64 {
        stdout
            .lines()
            .find_map(|l| l.strip_prefix(key))
            .unwrap()
            .trim()
            .parse()
            .unwrap()
    };
    assert!(value("spectral_max") >= 1.0);
    assert!(value("measured") >= 1.0);
}
