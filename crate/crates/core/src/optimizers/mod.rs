//! ADOM+VR, GT-PAGE, a plain gradient-tracking baseline, and the run loop.

mod adom_vr;
mod complexity;
mod gt_page;
mod run;
mod tracking;

pub use adom_vr::{
    adom_vr_estimator, adom_vr_params, adom_vr_step, AdomVr, AdomVrOptions, AdomVrParams,
    AdomVrState, SnapshotReset,
};
pub use complexity::{
    adom_vr_batch_rule, adom_vr_complexity, adom_vr_iteration_bound, gt_page_complexity,
    ComplexityBudget,
};
pub use gt_page::{
    gt_page_params, gt_page_step, page_estimator, stage_rho, Consensus, GtPage, GtPageOptions,
    GtPageParams, GtPageState, StepRule,
};
pub use run::{run, run_with_observer, Budgets, MethodSpec, RunFailure, RunTrace, TraceRecord};
pub use tracking::{gradient_tracking_step, GradientTracking, TrackingState};

use crate::error::{Error, Result};
use crate::network::{GraphSequence, NodeVector};
use crate::objectives::FiniteSumObjective;

/// Norm above which a run is declared divergent.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// A decentralized method advanced one iteration at a time.
pub trait Optimizer {
    fn name(&self) -> &'static str;

    fn step(&mut self, obj: &dyn FiniteSumObjective, seq: &GraphSequence) -> Result<()>;

    /// The iterate reported in traces.
    fn iterate(&self) -> &NodeVector;

    fn iteration(&self) -> u64;

    /// Gossip rounds used so far.
    fn communications(&self) -> u64;

    /// Component-gradient evaluations of the busiest node so far.
    fn oracle_calls(&self) -> u64;

    /// Parameter table for run metadata.
    fn parameters(&self) -> serde_json::Value;
}

pub(crate) fn guard(step: u64, buffers: &[(&str, &NodeVector)]) -> Result<()> {
    for (name, v) in buffers {
        if !v.is_finite() {
            return Err(Error::Divergence {
                step,
                detail: format!("{name} has non-finite entries"),
            });
        }
        let norm = v.norm();
        if norm > DIVERGENCE_NORM {
            return Err(Error::Divergence {
                step,
                detail: format!("norm of {name} is {norm:.3e}"),
            });
        }
    }
    Ok(())
}

/// `∇F_i(x_i)` for every node, `n` calls each.
pub(crate) fn local_gradients(obj: &dyn FiniteSumObjective, x: &NodeVector) -> NodeVector {
    let mut out = NodeVector::zeros(x.nodes(), x.dim());
    for i in 0..x.nodes() {
        obj.local_gradient(i, x.block(i), out.block_mut(i));
    }
    out
}

pub(crate) fn check_objective(obj: &dyn FiniteSumObjective, seq: &GraphSequence) -> Result<()> {
    if obj.nodes() != seq.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "objective has {} nodes, graph sequence {}",
            obj.nodes(),
            seq.node_count()
        )));
    }
    Ok(())
}
