use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gossipvr::harness::{build_sequence, run_experiment, ExperimentConfig};
use gossipvr::network::dump::write_sequence;
use gossipvr::network::measure_chi;

#[derive(Parser)]
#[command(
    name = "gossipvr",
    version,
    about = "Decentralized finite-sum optimization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment per config file (or the defaults when none is given).
    Run(RunArgs),
    /// Write the graph sequence of a config in the plain-text dump format.
    DumpGraphs(DumpArgs),
    /// Print the spectral and sampled χ of a config's graph sequence.
    MeasureChi(ChiArgs),
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long = "budget-comms")]
    budget_comms: Option<String>,
    #[arg(long = "budget-oracle")]
    budget_oracle: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Any other key, as `key=value`; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    configs: Vec<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    /// Run every config once per listed seed; outputs get a `_seed<k>` suffix.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Experiments run concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct DumpArgs {
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    /// Number of steps written; defaults to one period.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args)]
struct ChiArgs {
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, default_value_t = 20)]
    trials: usize,
}

fn load(path: Option<&Path>, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => {
            ExperimentConfig::from_file(p).with_context(|| format!("reading {}", p.display()))?
        }
        None => ExperimentConfig::default(),
    };
    let named = [
        ("method", &overrides.method),
        ("dataset", &overrides.dataset),
        ("m", &overrides.m),
        ("n", &overrides.n),
        ("b", &overrides.b),
        ("seed", &overrides.seed),
        ("budget_comms", &overrides.budget_comms),
        ("budget_oracle", &overrides.budget_oracle),
        ("out", &overrides.out),
    ];
    for (key, value) in named {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    for pair in &overrides.set {
        let Some((key, value)) = pair.split_once('=') else {
            bail!("--set expects key=value, got `{pair}`");
        };
        cfg.set(key.trim(), value.trim())?;
    }
    Ok(cfg)
}

fn with_seed_suffix(out: &Path, seed: u64) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}_seed{seed}.{ext}"))
}

fn run_one(cfg: &ExperimentConfig) -> Result<String> {
    let out =
        run_experiment(cfg).with_context(|| format!("experiment writing {}", cfg.out.display()))?;
    let last = out.trace.last();
    Ok(format!(
        "{} seed {}: {} iterations, {} comms, {} oracle calls, grad_norm_sq {:.3e}, dist_sq {:.3e} -> {}",
        out.trace.method,
        cfg.seed,
        last.iter,
        last.comms,
        last.oracle_calls,
        last.grad_norm_sq,
        last.dist_sq,
        out.csv_path.display()
    ))
}

fn run(args: &RunArgs) -> Result<()> {
    let paths: Vec<Option<&Path>> = if args.configs.is_empty() {
        vec![None]
    } else {
        args.configs.iter().map(|p| Some(p.as_path())).collect()
    };
    let mut jobs = Vec::new();
    for path in paths {
        let cfg = load(path, &args.overrides)?;
        if args.seeds.is_empty() {
            jobs.push(cfg);
            continue;
        }
        for &seed in &args.seeds {
            let mut c = cfg.clone();
            c.seed = seed;
            c.out = with_seed_suffix(&cfg.out, seed);
            jobs.push(c);
        }
    }
    let mut outs: Vec<&Path> = jobs.iter().map(|c| c.out.as_path()).collect();
    outs.sort();
    if let Some(w) = outs.windows(2).find(|w| w[0] == w[1]) {
        bail!("two experiments would write {}", w[0].display());
    }

    let workers = args.jobs.max(1).min(jobs.len());
    let chunk = jobs.len().div_ceil(workers);
    let results: Vec<Result<String>> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(run_one).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("experiment thread panicked"))
            .collect()
    });
    let mut failed = 0;
    for r in results {
        match r {
            Ok(line) => println!("{line}"),
            Err(e) => {
                failed += 1;
                eprintln!("error: {e:#}");
            }
        }
    }
    if failed > 0 {
        bail!("{failed} of {} experiments failed", jobs.len());
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(&args),
        Command::DumpGraphs(args) => {
            let cfg = load(args.config.as_deref(), &args.overrides)?;
            let seq = build_sequence(&cfg)?;
            let steps = args.steps.unwrap_or(seq.period());
            let text = write_sequence(&seq, steps);
            if args.overrides.out.is_some() {
                std::fs::write(&cfg.out, text)
                    .with_context(|| format!("writing {}", cfg.out.display()))?;
            } else {
                print!("{text}");
            }
            Ok(())
        }
        Command::MeasureChi(args) => {
            let cfg = load(args.config.as_deref(), &args.overrides)?;
            let seq = build_sequence(&cfg)?;
            println!("spectral_max {}", seq.max_graph_chi());
            println!("measured {}", measure_chi(&seq, args.trials, cfg.seed));
            Ok(())
        }
    }
}
