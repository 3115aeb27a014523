use thiserror::Error;

/// Errors raised by the simulator and its building blocks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("graph is disconnected ({components} components on {nodes} nodes)")]
    Disconnected { nodes: usize, components: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("random geometric graph with m={nodes}, radius={radius} stayed disconnected after {retries} resamples")]
    ConnectivityRetriesExhausted {
        nodes: usize,
        radius: f64,
        retries: usize,
    },

    #[error("operation requires a static graph sequence, got {0}")]
    NotStatic(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("batch size b={b} is below Lbar/L={ratio:.6}; the ADOM+VR rate requires b >= Lbar/L")]
    BatchBelowSmoothnessRatio { b: usize, ratio: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("divergence at step {step}: {detail}")]
    Divergence { step: u64, detail: String },

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
