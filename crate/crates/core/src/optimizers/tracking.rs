use super::{check_objective, guard, local_gradients, Optimizer};
use crate::error::{Error, Result};
use crate::network::{GossipMatrix, GraphSequence, NodeVector};
use crate::objectives::FiniteSumObjective;

/// Full-gradient tracking: `x⁺ = (I−W)x − ηy`, `y⁺ = (I−W)y + ∇F(x⁺) − ∇F(x)`.
#[derive(Debug, Clone)]
pub struct TrackingState {
    pub x: NodeVector,
    pub y: NodeVector,
    /// `∇F(x)` for the current `x`.
    pub grad: NodeVector,
    pub step: u64,
    pub communications: u64,
    pub oracle_calls: u64,
}

impl TrackingState {
    pub fn new(obj: &dyn FiniteSumObjective, x0: &[f64]) -> Result<Self> {
        if x0.len() != obj.dim() {
            return Err(Error::DimensionMismatch(format!(
                "initial point has length {}, objective dim {}",
                x0.len(),
                obj.dim()
            )));
        }
        let x = NodeVector::replicate(obj.nodes(), x0);
        let grad = local_gradients(obj, &x);
        Ok(Self {
            x,
            y: grad.clone(),
            grad,
            step: 0,
            communications: 0,
            oracle_calls: obj.components() as u64,
        })
    }
}

pub fn gradient_tracking_step(
    state: &mut TrackingState,
    eta: f64,
    obj: &dyn FiniteSumObjective,
    w: &GossipMatrix,
) -> Result<()> {
    let mut x_new = w.apply_complement(&state.x)?;
    x_new.axpy(-eta, &state.y);
    let grad_new = local_gradients(obj, &x_new);
    let mut y_new = w.apply_complement(&state.y)?;
    y_new.axpy(1.0, &grad_new);
    y_new.axpy(-1.0, &state.grad);
    state.x = x_new;
    state.y = y_new;
    state.grad = grad_new;
    state.step += 1;
    state.communications += 1;
    state.oracle_calls += obj.components() as u64;
    guard(state.step, &[("x", &state.x), ("y", &state.y)])
}

#[derive(Debug, Clone)]
pub struct GradientTracking {
    pub eta: f64,
    pub state: TrackingState,
}

impl GradientTracking {
    pub fn new(eta: f64, obj: &dyn FiniteSumObjective, x0: &[f64]) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step must be nonnegative, got {eta}"
            )));
        }
        Ok(Self {
            eta,
            state: TrackingState::new(obj, x0)?,
        })
    }
}

impl Optimizer for GradientTracking {
    fn name(&self) -> &'static str {
        "gt_baseline"
    }

    fn step(&mut self, obj: &dyn FiniteSumObjective, seq: &GraphSequence) -> Result<()> {
        check_objective(obj, seq)?;
        let w = seq.gossip(self.state.step);
        gradient_tracking_step(&mut self.state, self.eta, obj, w)
    }

    fn iterate(&self) -> &NodeVector {
        &self.state.x
    }

    fn iteration(&self) -> u64 {
        self.state.step
    }

    fn communications(&self) -> u64 {
        self.state.communications
    }

    fn oracle_calls(&self) -> u64 {
        self.state.oracle_calls
    }

    fn parameters(&self) -> serde_json::Value {
        serde_json::json!({ "eta": self.eta })
    }
}
