use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const NAMES: &'static [&'static str] = &[$($text),+];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::Config(format!(
                        "unknown {} {other:?}; valid values: {}",
                        stringify!($name).to_lowercase(),
                        Self::NAMES.join(", ")
                    ))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

keyword_enum!(Method {
    AdomVr => "adom_vr",
    GtPage => "gt_page",
    GtBaseline => "gt_baseline",
});

keyword_enum!(ObjectiveKind {
    Logistic => "logistic",
    Nlls => "nlls",
    Chain => "chain",
    ZeroChain => "zero_chain",
});

keyword_enum!(Topology {
    Ring => "ring",
    Complete => "complete",
    Star => "star",
    Path => "path",
    Geometric => "geometric",
    TwoStar => "two_star",
    RotatingStar => "rotating_star",
    Replay => "replay",
});

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub method: Method,
    pub objective: ObjectiveKind,
    pub dataset: Option<PathBuf>,
    pub topology: Topology,
    /// Graph dump read when `topology = replay`.
    pub graphs: Option<PathBuf>,
    pub radius: f64,
    /// Number of distinct random graphs before the sequence repeats.
    pub horizon: usize,
    pub m: usize,
    pub n: usize,
    pub b: Option<usize>,
    pub seed: u64,
    pub lambda: f64,
    pub cadence: u64,
    pub budget_iters: Option<u64>,
    pub budget_comms: Option<u64>,
    pub budget_oracle: Option<u64>,
    pub out: PathBuf,
    pub eta: Option<f64>,
    pub stages: Option<usize>,
    pub chebyshev_degree: Option<usize>,
    pub per_node_coin: bool,
    pub lazy_reset: bool,
    pub chi_trials: usize,
    pub chain_l: f64,
    pub chain_mu: f64,
    pub chain_dim: usize,
    pub hard_l: f64,
    pub hard_delta: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            method: Method::AdomVr,
            objective: ObjectiveKind::Logistic,
            dataset: None,
            topology: Topology::Ring,
            graphs: None,
            radius: 0.5,
            horizon: 64,
            m: 10,
            n: 10,
            b: None,
            seed: 0,
            lambda: 0.1,
            cadence: 1,
            budget_iters: None,
            budget_comms: None,
            budget_oracle: None,
            out: PathBuf::from("trace.csv"),
            eta: None,
            stages: None,
            chebyshev_degree: None,
            per_node_coin: false,
            lazy_reset: false,
            chi_trials: 20,
            chain_l: 4.0,
            chain_mu: 1.0,
            chain_dim: 24,
            hard_l: 1.0,
            hard_delta: 1.0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key}: expected true or false, got {value:?}"
        ))),
    }
}

fn optional<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value == "auto" || value.is_empty() {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

pub const KEYS: &[&str] = &[
    "method",
    "objective",
    "dataset",
    "topology",
    "graphs",
    "radius",
    "horizon",
    "m",
    "n",
    "b",
    "seed",
    "lambda",
    "cadence",
    "budget_iters",
    "budget_comms",
    "budget_oracle",
    "out",
    "eta",
    "stages",
    "chebyshev_degree",
    "per_node_coin",
    "lazy_reset",
    "chi_trials",
    "chain_l",
    "chain_mu",
    "chain_dim",
    "hard_l",
    "hard_delta",
];

impl ExperimentConfig {
    /// Reads `key = value` lines; `#` starts a comment.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::parse_text(&text)
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                message: format!("expected key = value, got {line:?}"),
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Parse {
                    line: lineno + 1,
                    message: e.to_string(),
                })?;
        }
        Ok(cfg)
    }

    /// Applies one setting; dashes in `key` are read as underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        let k = key.as_str();
        match k {
            "method" => self.method = value.parse()?,
            "objective" => self.objective = value.parse()?,
            "dataset" => self.dataset = Some(PathBuf::from(value)),
            "topology" => self.topology = value.parse()?,
            "graphs" => self.graphs = Some(PathBuf::from(value)),
            "radius" => self.radius = parse(k, value)?,
            "horizon" => self.horizon = parse(k, value)?,
            "m" => self.m = parse(k, value)?,
            "n" => self.n = parse(k, value)?,
            "b" => self.b = optional(k, value)?,
            "seed" => self.seed = parse(k, value)?,
            "lambda" => self.lambda = parse(k, value)?,
            "cadence" => self.cadence = parse(k, value)?,
            "budget_iters" => self.budget_iters = optional(k, value)?,
            "budget_comms" => self.budget_comms = optional(k, value)?,
            "budget_oracle" => self.budget_oracle = optional(k, value)?,
            "out" => self.out = PathBuf::from(value),
            "eta" => self.eta = optional(k, value)?,
            "stages" => self.stages = optional(k, value)?,
            "chebyshev_degree" => self.chebyshev_degree = optional(k, value)?,
            "per_node_coin" => self.per_node_coin = parse_bool(k, value)?,
            "lazy_reset" => self.lazy_reset = parse_bool(k, value)?,
            "chi_trials" => self.chi_trials = parse(k, value)?,
            "chain_l" => self.chain_l = parse(k, value)?,
            "chain_mu" => self.chain_mu = parse(k, value)?,
            "chain_dim" => self.chain_dim = parse(k, value)?,
            "hard_l" => self.hard_l = parse(k, value)?,
            "hard_delta" => self.hard_delta = parse(k, value)?,
            _ => {
                return Err(Error::Config(format!(
                    "unknown key {key:?}; valid keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.m == 0 || self.n == 0 {
            return bad(format!(
                "m and n must be positive, got m={}, n={}",
                self.m, self.n
            ));
        }
        if self.cadence == 0 {
            return bad("cadence must be positive".into());
        }
        if self.budget_iters.is_none()
            && self.budget_comms.is_none()
            && self.budget_oracle.is_none()
        {
            return bad("set at least one of budget_iters, budget_comms, budget_oracle".into());
        }
        if matches!(
            self.objective,
            ObjectiveKind::Logistic | ObjectiveKind::Nlls
        ) {
            match &self.dataset {
                None => return bad(format!("objective {} needs a dataset", self.objective)),
                Some(p) if !p.is_file() => {
                    return bad(format!("dataset {} does not exist", p.display()))
                }
                _ => {}
            }
        }
        if self.objective == ObjectiveKind::ZeroChain
            && (self.budget_comms.is_none() || self.budget_oracle.is_none())
        {
            return bad("zero_chain sizes its instance from budget_comms and budget_oracle".into());
        }
        if self.topology == Topology::Replay && self.graphs.is_none() {
            return bad("topology replay needs a graphs file".into());
        }
        if self.lambda < 0.0 {
            return bad(format!("lambda must be nonnegative, got {}", self.lambda));
        }
        Ok(())
    }

    /// Canonical `key = value` form, one line per key in [`KEYS`] order.
    pub fn to_text(&self) -> String {
        fn opt<T: fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map_or_else(|| "auto".to_string(), T::to_string)
        }
        fn path(v: &Option<PathBuf>) -> String {
            v.as_ref()
                .map_or_else(String::new, |p| p.display().to_string())
        }
        let values = [
            self.method.to_string(),
            self.objective.to_string(),
            path(&self.dataset),
            self.topology.to_string(),
            path(&self.graphs),
            self.radius.to_string(),
            self.horizon.to_string(),
            self.m.to_string(),
            self.n.to_string(),
            opt(&self.b),
            self.seed.to_string(),
            self.lambda.to_string(),
            self.cadence.to_string(),
            opt(&self.budget_iters),
            opt(&self.budget_comms),
            opt(&self.budget_oracle),
            self.out.display().to_string(),
            opt(&self.eta),
            opt(&self.stages),
            opt(&self.chebyshev_degree),
            self.per_node_coin.to_string(),
            self.lazy_reset.to_string(),
            self.chi_trials.to_string(),
            self.chain_l.to_string(),
            self.chain_mu.to_string(),
            self.chain_dim.to_string(),
            self.hard_l.to_string(),
            self.hard_delta.to_string(),
        ];
        KEYS.iter()
            .zip(values)
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
