//! Finite-sum objectives `F(x) = Σ_i F_i(x_i)` with `F_i = (1/n) Σ_j f_ij`.

mod counting;
mod quadratic;
mod rows;
mod shard;
mod smoothness;

pub use counting::CountingObjective;
pub use quadratic::QuadraticObjective;
pub use rows::{
    logistic_objective, nlls_objective, LogisticLoss, NllsOptions, RowLoss, RowObjective,
    SigmoidSquaresLoss,
};
pub use shard::DatasetShard;
pub use smoothness::SmoothnessInfo;

use crate::error::{Error, Result};
use crate::network::node_vector::{self, NodeVector};

/// Node-local finite sums over a shared dimension.
///
/// Component evaluators take unchecked indices and panic when out of range;
/// [`batch_gradient`] is the checked entry point.
pub trait FiniteSumObjective: Send + Sync {
    fn nodes(&self) -> usize;
    fn components(&self) -> usize;
    fn dim(&self) -> usize;

    fn component_value(&self, node: usize, component: usize, x: &[f64]) -> f64;

    /// Overwrites `out` with `∇f_ij(x)`.
    fn component_gradient(&self, node: usize, component: usize, x: &[f64], out: &mut [f64]);

    fn smoothness(&self) -> &SmoothnessInfo;

    /// `F_i(x)`.
    fn local_value(&self, node: usize, x: &[f64]) -> f64 {
        let n = self.components();
        (0..n)
            .map(|j| self.component_value(node, j, x))
            .sum::<f64>()
            / n as f64
    }

    /// Overwrites `out` with `∇F_i(x)`.
    fn local_gradient(&self, node: usize, x: &[f64], out: &mut [f64]) {
        let n = self.components();
        let mut buf = vec![0.0; self.dim()];
        out.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            self.component_gradient(node, j, x, &mut buf);
            node_vector::axpy(1.0 / n as f64, &buf, out);
        }
    }
}

fn check_point<O: FiniteSumObjective + ?Sized>(obj: &O, x: &NodeVector) -> Result<()> {
    if x.nodes() != obj.nodes() || x.dim() != obj.dim() {
        return Err(Error::DimensionMismatch(format!(
            "objective is {} nodes x dim {}, point is {} x {}",
            obj.nodes(),
            obj.dim(),
            x.nodes(),
            x.dim()
        )));
    }
    Ok(())
}

/// Stacked local gradients `(∇F_1(x_1), …, ∇F_m(x_m))`.
pub fn full_gradient<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    x: &NodeVector,
) -> Result<NodeVector> {
    check_point(obj, x)?;
    let mut out = NodeVector::zeros(x.nodes(), x.dim());
    for i in 0..x.nodes() {
        obj.local_gradient(i, x.block(i), out.block_mut(i));
    }
    Ok(out)
}

/// `Σ_i F_i(x_i)`.
pub fn total_value<O: FiniteSumObjective + ?Sized>(obj: &O, x: &NodeVector) -> Result<f64> {
    check_point(obj, x)?;
    Ok((0..x.nodes()).map(|i| obj.local_value(i, x.block(i))).sum())
}

/// Value of the network average `(1/m) Σ_i F_i(z)` at a single point.
pub fn average_value<O: FiniteSumObjective + ?Sized>(obj: &O, z: &[f64]) -> f64 {
    let m = obj.nodes();
    (0..m).map(|i| obj.local_value(i, z)).sum::<f64>() / m as f64
}

/// Gradient of `(1/m) Σ_i F_i` at a single point.
pub fn average_gradient<O: FiniteSumObjective + ?Sized>(obj: &O, z: &[f64]) -> Vec<f64> {
    let m = obj.nodes();
    let mut out = vec![0.0; obj.dim()];
    let mut buf = vec![0.0; obj.dim()];
    for i in 0..m {
        obj.local_gradient(i, z, &mut buf);
        node_vector::axpy(1.0 / m as f64, &buf, &mut out);
    }
    out
}

/// `Σ_k w_k ∇f_{i, j_k}(x_i)`; duplicates are evaluated once per occurrence.
pub fn batch_gradient<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    node: usize,
    weighted: &[(usize, f64)],
    x: &[f64],
) -> Result<Vec<f64>> {
    if node >= obj.nodes() {
        return Err(Error::IndexOutOfRange(format!(
            "node {node} of {}",
            obj.nodes()
        )));
    }
    if x.len() != obj.dim() {
        return Err(Error::DimensionMismatch(format!(
            "point has length {}, objective dim {}",
            x.len(),
            obj.dim()
        )));
    }
    if let Some(&(j, _)) = weighted.iter().find(|(j, _)| *j >= obj.components()) {
        return Err(Error::IndexOutOfRange(format!(
            "component {j} of {}",
            obj.components()
        )));
    }
    let mut out = vec![0.0; obj.dim()];
    let mut buf = vec![0.0; obj.dim()];
    for &(j, w) in weighted {
        obj.component_gradient(node, j, x, &mut buf);
        node_vector::axpy(w, &buf, &mut out);
    }
    Ok(out)
}

/// Outcome of [`finite_difference_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    /// Largest coordinate deviation, relative to the largest analytic entry of that block.
    pub max_relative_error: f64,
    pub passed: bool,
}

/// Central differences of every `F_i` against `∇F_i`, coordinate by coordinate.
pub fn finite_difference_check<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    x: &NodeVector,
    h: f64,
    tolerance: f64,
) -> Result<GradientCheck> {
    check_point(obj, x)?;
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "step h must be positive, got {h}"
        )));
    }
    let d = obj.dim();
    let mut worst: f64 = 0.0;
    let mut grad = vec![0.0; d];
    for i in 0..obj.nodes() {
        let base = x.block(i);
        obj.local_gradient(i, base, &mut grad);
        let scale = grad.iter().fold(0.0_f64, |a, g| a.max(g.abs())).max(1e-12);
        let mut probe = base.to_vec();
        for k in 0..d {
            probe[k] = base[k] + h;
            let up = obj.local_value(i, &probe);
            probe[k] = base[k] - h;
            let down = obj.local_value(i, &probe);
            probe[k] = base[k];
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((fd - grad[k]).abs() / scale);
        }
    }
    Ok(GradientCheck {
        max_relative_error: worst,
        passed: worst <= tolerance,
    })
}
