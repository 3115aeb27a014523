use std::fmt;

use serde::Serialize;

use super::{
    AdomVr, AdomVrOptions, AdomVrParams, GradientTracking, GtPage, GtPageOptions, GtPageParams,
    Optimizer,
};
use crate::error::{Error, Result};
use crate::network::node_vector::dist_sq;
use crate::network::{GraphSequence, NodeVector};
use crate::objectives::{average_gradient, average_value, FiniteSumObjective};

#[derive(Debug, Clone)]
pub enum MethodSpec {
    AdomVr {
        params: AdomVrParams,
        options: AdomVrOptions,
    },
    GtPage {
        params: GtPageParams,
        options: GtPageOptions,
    },
    GradientTracking {
        eta: f64,
    },
}

impl MethodSpec {
    /// Builds the optimizer at `x⁰ = x0` replicated (zeros when `None`).
    pub fn build(
        &self,
        obj: &dyn FiniteSumObjective,
        seq: &GraphSequence,
        x0: Option<&[f64]>,
        seed: u64,
    ) -> Result<Box<dyn Optimizer>> {
        let zeros = vec![0.0; obj.dim()];
        let x0 = x0.unwrap_or(&zeros);
        Ok(match self {
            MethodSpec::AdomVr { params, options } => {
                Box::new(AdomVr::new(*params, obj, x0, *options, seed)?)
            }
            MethodSpec::GtPage { params, options } => {
                Box::new(GtPage::new(*params, obj, seq, x0, *options, seed)?)
            }
            MethodSpec::GradientTracking { eta } => Box::new(GradientTracking::new(*eta, obj, x0)?),
        })
    }
}

/// Stopping limits; a run stops before the first step taken at or past any of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Budgets {
    pub max_iterations: Option<u64>,
    pub max_communications: Option<u64>,
    pub max_oracle_calls: Option<u64>,
}

impl Budgets {
    pub fn iterations(n: u64) -> Self {
        Self {
            max_iterations: Some(n),
            ..Self::default()
        }
    }

    fn exhausted(&self, opt: &dyn Optimizer) -> bool {
        let hit = |limit: Option<u64>, used: u64| limit.is_some_and(|l| used >= l);
        hit(self.max_iterations, opt.iteration())
            || hit(self.max_communications, opt.communications())
            || hit(self.max_oracle_calls, opt.oracle_calls())
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations.is_none()
            && self.max_communications.is_none()
            && self.max_oracle_calls.is_none()
        {
            return Err(Error::InvalidParameter(
                "at least one budget must be set".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iter: u64,
    pub comms: u64,
    pub oracle_calls: u64,
    /// `‖x̄ − x*‖²`, NaN without a reference point.
    pub dist_sq: f64,
    /// `(1/m) Σ ‖x_i − x*‖²`, NaN without a reference point.
    pub node_dist_sq: f64,
    /// `‖∇F(x̄)‖²` of the network average.
    pub grad_norm_sq: f64,
    pub consensus_err: f64,
    /// `F(x̄)`.
    pub value: f64,
}

impl TraceRecord {
    pub fn measure(
        opt: &dyn Optimizer,
        obj: &dyn FiniteSumObjective,
        x_star: Option<&[f64]>,
    ) -> Self {
        let x = opt.iterate();
        let mean = x.mean_block();
        let g = average_gradient(obj, &mean);
        let (dist, node_dist) = match x_star {
            Some(s) => (
                dist_sq(&mean, s),
                x.blocks().map(|b| dist_sq(b, s)).sum::<f64>() / x.nodes() as f64,
            ),
            None => (f64::NAN, f64::NAN),
        };
        Self {
            iter: opt.iteration(),
            comms: opt.communications(),
            oracle_calls: opt.oracle_calls(),
            dist_sq: dist,
            node_dist_sq: node_dist,
            grad_norm_sq: g.iter().map(|v| v * v).sum(),
            consensus_err: x.consensus_error(),
            value: average_value(obj, &mean),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunTrace {
    pub method: String,
    pub parameters: serde_json::Value,
    pub records: Vec<TraceRecord>,
    #[serde(skip)]
    pub final_iterate: NodeVector,
}

impl RunTrace {
    pub fn last(&self) -> &TraceRecord {
        self.records
            .last()
            .expect("a trace always holds the initial record")
    }

    /// Smallest `‖∇F(x̄)‖²` over records with `iter ≤ k`.
    pub fn min_grad_norm_sq(&self, k: u64) -> f64 {
        self.records
            .iter()
            .filter(|r| r.iter <= k)
            .map(|r| r.grad_norm_sq)
            .fold(f64::INFINITY, f64::min)
    }
}

/// A failed run: the error, the records so far and the last finite iterate.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub trace: RunTrace,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} failed after {} records: {}",
            self.trace.method,
            self.trace.records.len(),
            self.error
        )
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<RunFailure> for Error {
    fn from(f: RunFailure) -> Self {
        f.error
    }
}

/// Records every `cadence` iterations plus the initial and final iterate.
#[allow(clippy::result_large_err)]
pub fn run(
    method: &MethodSpec,
    obj: &dyn FiniteSumObjective,
    seq: &GraphSequence,
    budgets: &Budgets,
    cadence: u64,
    seed: u64,
    x_star: Option<&[f64]>,
) -> std::result::Result<RunTrace, RunFailure> {
    run_with_observer(
        method,
        obj,
        seq,
        budgets,
        cadence,
        seed,
        x_star,
        &mut |_| {},
    )
}

/// As [`run`], calling `observer` on the initial state and after every step.
#[allow(clippy::too_many_arguments, clippy::result_large_err)]
pub fn run_with_observer(
    method: &MethodSpec,
    obj: &dyn FiniteSumObjective,
    seq: &GraphSequence,
    budgets: &Budgets,
    cadence: u64,
    seed: u64,
    x_star: Option<&[f64]>,
    observer: &mut dyn FnMut(&dyn Optimizer),
) -> std::result::Result<RunTrace, RunFailure> {
    let empty = |error: Error| RunFailure {
        error,
        trace: RunTrace {
            method: String::new(),
            parameters: serde_json::Value::Null,
            records: Vec::new(),
            final_iterate: NodeVector::zeros(0, 0),
        },
    };
    budgets.validate().map_err(empty)?;
    if cadence == 0 {
        return Err(empty(Error::InvalidParameter(
            "cadence must be positive".into(),
        )));
    }
    if let Some(s) = x_star {
        if s.len() != obj.dim() {
            return Err(empty(Error::DimensionMismatch(format!(
                "reference point has length {}, objective dim {}",
                s.len(),
                obj.dim()
            ))));
        }
    }
    let mut opt = method.build(obj, seq, None, seed).map_err(empty)?;
    let mut trace = RunTrace {
        method: opt.name().to_string(),
        parameters: opt.parameters(),
        records: vec![TraceRecord::measure(opt.as_ref(), obj, x_star)],
        final_iterate: opt.iterate().clone(),
    };
    observer(opt.as_ref());
    while !budgets.exhausted(opt.as_ref()) {
        if let Err(error) = opt.step(obj, seq) {
            log::warn!(
                "{} stopped at iteration {}: {error}",
                trace.method,
                opt.iteration()
            );
            return Err(RunFailure { error, trace });
        }
        observer(opt.as_ref());
        trace.final_iterate.clone_from(opt.iterate());
        if opt.iteration() % cadence == 0 || budgets.exhausted(opt.as_ref()) {
            trace
                .records
                .push(TraceRecord::measure(opt.as_ref(), obj, x_star));
        }
    }
    Ok(trace)
}
