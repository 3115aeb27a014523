use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, Method, ObjectiveKind, Topology};
use super::libsvm::parse_libsvm;
use super::partition::partition_dataset;
use super::reference::{reference_solution, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::hardinstances::{nonconvex_hard_objective, strongly_convex_chain};
use crate::network::dump::parse_sequence;
use crate::network::mixing::measure_chi;
use crate::network::sequence::{
    default_star_partition, rotating_star_sequence, two_star_hop_sequence,
};
use crate::network::{random_geometric_sequence, GraphSequence, WeightedGraph};
use crate::objectives::{logistic_objective, nlls_objective, FiniteSumObjective, NllsOptions};
use crate::optimizers::{
    adom_vr_batch_rule, adom_vr_params, gt_page_params, run, AdomVrOptions, Budgets, Consensus,
    GtPageOptions, MethodSpec, RunTrace, SnapshotReset, TraceRecord,
};

/// Everything wired up for one configuration, before running.
pub struct Prepared {
    pub objective: Box<dyn FiniteSumObjective>,
    pub sequence: GraphSequence,
    pub x_star: Option<Vec<f64>>,
    pub reference_value: Option<f64>,
    /// Largest single-graph `χ` over one period.
    pub chi_spectral: f64,
    /// Sampled certificate, only for time-varying sequences.
    pub chi_measured: Option<f64>,
    /// The value handed to the parameter formulas.
    pub chi: f64,
    pub method: MethodSpec,
}

pub struct ExperimentOutput {
    pub trace: RunTrace,
    pub metadata: serde_json::Value,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

/// The graph sequence a config describes.
pub fn build_sequence(cfg: &ExperimentConfig) -> Result<GraphSequence> {
    let m = cfg.m;
    match cfg.topology {
        Topology::Ring => GraphSequence::fixed(WeightedGraph::ring(m)?),
        Topology::Complete => GraphSequence::fixed(WeightedGraph::complete(m)?),
        Topology::Star => GraphSequence::fixed(WeightedGraph::star(m, 0)?),
        Topology::Path => GraphSequence::fixed(WeightedGraph::path(m)?),
        Topology::Geometric => random_geometric_sequence(m, cfg.radius, cfg.seed, cfg.horizon),
        Topology::TwoStar => two_star_hop_sequence(m),
        Topology::RotatingStar => {
            let (s1, s2) = default_star_partition(m);
            rotating_star_sequence(m, &s1, &s2)
        }
        Topology::Replay => {
            let path = cfg.graphs.as_ref().expect("validated");
            let seq = parse_sequence(&std::fs::read_to_string(path)?)?;
            if seq.node_count() != m {
                return Err(Error::Config(format!(
                    "graph file has {} nodes, config m = {m}",
                    seq.node_count()
                )));
            }
            Ok(seq)
        }
    }
}

fn load_shards(cfg: &ExperimentConfig) -> Result<Vec<crate::objectives::DatasetShard>> {
    let data = parse_libsvm(cfg.dataset.as_ref().expect("validated"))?;
    partition_dataset(&data, cfg.m, cfg.n, cfg.seed)
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let mut sequence = build_sequence(cfg)?;
    let objective: Box<dyn FiniteSumObjective> = match cfg.objective {
        ObjectiveKind::Logistic => Box::new(logistic_objective(load_shards(cfg)?, cfg.lambda)?),
        ObjectiveKind::Nlls => {
            let shards = load_shards(cfg)?
                .into_iter()
                .map(|s| s.map_labels(|y| if y < 0.0 { 0.0 } else { y }))
                .collect();
            let opts = NllsOptions {
                lambda: cfg.lambda,
                seed: cfg.seed,
                ..NllsOptions::default()
            };
            Box::new(nlls_objective(shards, opts)?)
        }
        ObjectiveKind::Chain => Box::new(strongly_convex_chain(
            cfg.m,
            cfg.n,
            cfg.chain_l,
            cfg.chain_mu,
            cfg.chain_dim,
        )?),
        ObjectiveKind::ZeroChain => {
            let (inst, seq) = nonconvex_hard_objective(
                cfg.m,
                cfg.n,
                cfg.hard_l,
                cfg.hard_delta,
                cfg.budget_comms.expect("validated"),
                cfg.budget_oracle.expect("validated"),
            )?;
            if cfg.topology != Topology::RotatingStar {
                log::info!("zero_chain uses its own rotating-star sequence; topology ignored");
            }
            sequence = seq;
            Box::new(inst)
        }
    };
    if objective.nodes() != sequence.node_count() {
        return Err(Error::Config(format!(
            "objective has {} nodes, topology {}",
            objective.nodes(),
            sequence.node_count()
        )));
    }

    let chi_spectral = sequence.max_graph_chi();
    let chi_measured =
        (!sequence.is_static()).then(|| measure_chi(&sequence, cfg.chi_trials, cfg.seed));
    let chi = chi_measured.unwrap_or(chi_spectral);

    let s = objective.smoothness();
    let n = objective.components();
    let method = match cfg.method {
        Method::AdomVr => {
            let b = cfg
                .b
                .unwrap_or_else(|| adom_vr_batch_rule(n, s.l, s.lbar, s.mu));
            MethodSpec::AdomVr {
                params: adom_vr_params(s.mu, s.l, s.lbar, chi, n, b)?,
                options: AdomVrOptions {
                    reset: if cfg.lazy_reset {
                        SnapshotReset::Lazy
                    } else {
                        SnapshotReset::Eager
                    },
                    stages: cfg.stages.unwrap_or(1),
                },
            }
        }
        Method::GtPage => {
            let mut params = gt_page_params(s.l, s.lhat, chi, n, cfg.b, None)?;
            if let Some(t) = cfg.stages {
                params = params.with_stages(t)?;
            }
            if let Some(eta) = cfg.eta {
                params = params.with_step(eta)?;
            }
            let consensus = match cfg.chebyshev_degree {
                Some(degree) => Consensus::Chebyshev { degree },
                None => Consensus::MultiStage,
            };
            MethodSpec::GtPage {
                params,
                options: GtPageOptions {
                    consensus,
                    per_node_coin: cfg.per_node_coin,
                },
            }
        }
        Method::GtBaseline => MethodSpec::GradientTracking {
            eta: cfg.eta.unwrap_or(1.0 / (2.0 * s.l * chi)),
        },
    };

    let (x_star, reference_value) = if s.mu > 0.0 {
        let r = reference_solution(objective.as_ref(), DEFAULT_TOLERANCE)?;
        (Some(r.x), Some(r.value))
    } else {
        (None, None)
    };

    Ok(Prepared {
        objective,
        sequence,
        x_star,
        reference_value,
        chi_spectral,
        chi_measured,
        chi,
        method,
    })
}

#[derive(Serialize)]
struct CsvRow {
    iter: u64,
    comms: u64,
    oracle_calls: u64,
    dist_sq: f64,
    grad_norm_sq: f64,
    consensus_err: f64,
}

/// Writes `iter,comms,oracle_calls,dist_sq,grad_norm_sq,consensus_err`.
pub fn write_trace_csv<W: Write>(records: &[TraceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(CsvRow {
            iter: r.iter,
            comms: r.comms,
            oracle_calls: r.oracle_calls,
            dist_sq: r.dist_sq,
            grad_norm_sq: r.grad_norm_sq,
            consensus_err: r.consensus_err,
        })
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn config_digest(cfg: &ExperimentConfig) -> String {
    format!("{:x}", Sha256::digest(cfg.to_text().as_bytes()))
}

fn metadata_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Runs one configuration and writes the CSV trace to `cfg.out` and the
/// metadata next to it with a `.json` extension. A failed run still writes
/// both files before the error is returned.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let prep = prepare(cfg)?;
    let budgets = Budgets {
        max_iterations: cfg.budget_iters,
        max_communications: cfg.budget_comms,
        max_oracle_calls: cfg.budget_oracle,
    };
    let obj = prep.objective.as_ref();
    let outcome = run(
        &prep.method,
        obj,
        &prep.sequence,
        &budgets,
        cfg.cadence,
        cfg.seed,
        prep.x_star.as_deref(),
    );
    let (trace, failure) = match outcome {
        Ok(t) => (t, None),
        Err(f) => (f.trace, Some(f.error)),
    };

    let metadata = serde_json::json!({
        "config": cfg.to_text(),
        "config_sha256": config_digest(cfg),
        "seed": cfg.seed,
        "method": trace.method,
        "objective": cfg.objective.as_str(),
        "topology": prep.sequence.kind().to_string(),
        "chi": {
            "spectral_max": prep.chi_spectral,
            "measured": prep.chi_measured,
            "used": prep.chi,
        },
        "smoothness": obj.smoothness(),
        "parameters": trace.parameters,
        "reference_value": prep.reference_value,
        "records": trace.records.len(),
        "status": failure.as_ref().map_or_else(|| "ok".to_string(), |e| e.to_string()),
    });

    let csv_path = cfg.out.clone();
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_trace_csv(&trace.records, std::fs::File::create(&csv_path)?)?;
    let json_path = metadata_path(&csv_path);
    std::fs::write(&json_path, serde_json::to_string_pretty(&metadata)? + "\n")?;

    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ExperimentOutput {
        trace,
        metadata,
        csv_path,
        json_path,
    })
}
