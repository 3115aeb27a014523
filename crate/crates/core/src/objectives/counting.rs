use std::sync::atomic::{AtomicU64, Ordering};

use super::smoothness::SmoothnessInfo;
use super::FiniteSumObjective;

/// Counts component-gradient evaluations of the wrapped objective.
///
/// Local gradients are routed through the component evaluator, so a full
/// local gradient counts as `n` calls.
#[derive(Debug)]
pub struct CountingObjective<'a, O: ?Sized> {
    inner: &'a O,
    gradient_calls: AtomicU64,
}

impl<'a, O: FiniteSumObjective + ?Sized> CountingObjective<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        Self {
            inner,
            gradient_calls: AtomicU64::new(0),
        }
    }

    pub fn gradient_calls(&self) -> u64 {
        self.gradient_calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.gradient_calls.store(0, Ordering::Relaxed);
    }
}

impl<O: FiniteSumObjective + ?Sized> FiniteSumObjective for CountingObjective<'_, O> {
    fn nodes(&self) -> usize {
        self.inner.nodes()
    }

    fn components(&self) -> usize {
        self.inner.components()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn component_value(&self, node: usize, component: usize, x: &[f64]) -> f64 {
        self.inner.component_value(node, component, x)
    }

    fn component_gradient(&self, node: usize, component: usize, x: &[f64], out: &mut [f64]) {
        self.gradient_calls.fetch_add(1, Ordering::Relaxed);
        self.inner.component_gradient(node, component, x, out);
    }

    fn smoothness(&self) -> &SmoothnessInfo {
        self.inner.smoothness()
    }
}
