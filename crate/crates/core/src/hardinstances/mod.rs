//! Lower-bound constructions and the bound evaluator.

mod chain;
mod zero_chain;

pub use chain::{chain_ratio, strongly_convex_chain, ChainInstance, ChainRole};
pub use zero_chain::{
    nonconvex_hard_objective, phi, phi_derivative, prog, progress_bound, psi, psi_derivative,
    split_block_gradient, split_block_value, zero_chain_l, ChainHalf, ZeroChainInstance, DELTA0,
    G0, L0,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::NodeVector;

/// Both parts of the strongly convex lower bound; `None` marks an inapplicable part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    pub communication: Option<f64>,
    pub computation: Option<f64>,
    pub value: f64,
}

/// `max{T₁, T₂}` with
/// `T₁ = (1 − 2/(√(2κ_b/3 + 1/3) + 1))^{2 + 16 N_c/(χ − 24)}` (needs χ > 24) and
/// `T₂ = (1 − 2n/(√n √(2κ_s/3 + n/3) + n))^{4 N_s / n}` (needs κ_s ≥ n).
pub fn lower_bound_value(
    kappa_b: f64,
    kappa_s: f64,
    chi: f64,
    n: usize,
    n_c: f64,
    n_s: f64,
) -> Result<LowerBound> {
    let communication = (chi > 24.0 && kappa_b >= 1.0).then(|| {
        let base = 1.0 - 2.0 / ((2.0 * kappa_b / 3.0 + 1.0 / 3.0).sqrt() + 1.0);
        base.max(0.0).powf(2.0 + 16.0 * n_c / (chi - 24.0))
    });
    let nf = n as f64;
    let computation = (n >= 1 && kappa_s >= nf).then(|| {
        let base = 1.0 - 2.0 * nf / (nf.sqrt() * (2.0 * kappa_s / 3.0 + nf / 3.0).sqrt() + nf);
        base.max(0.0).powf(4.0 * n_s / nf)
    });
    let value = match (communication, computation) {
        (None, None) => {
            return Err(Error::InvalidParameter(format!(
                "neither bound applies: chi = {chi} (needs > 24), kappa_s = {kappa_s} (needs >= n = {n})"
            )))
        }
        (a, b) => a.unwrap_or(0.0).max(b.unwrap_or(0.0)),
    };
    Ok(LowerBound {
        communication,
        computation,
        value,
    })
}

/// One audited iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AuditPoint {
    pub iteration: u64,
    pub communications: u64,
    pub oracle_calls: u64,
    /// Largest prog over all nodes and all recorded iterates so far.
    pub prog: usize,
    pub bound: usize,
}

/// Running per-node maxima of `prog` over recorded iterates.
#[derive(Debug, Clone)]
pub struct ProgressCounter {
    m: usize,
    n: usize,
    per_node: Vec<usize>,
    history: Vec<AuditPoint>,
}

impl ProgressCounter {
    pub fn new(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            per_node: vec![0; m],
            history: Vec::new(),
        }
    }

    pub fn record(
        &mut self,
        iteration: u64,
        communications: u64,
        oracle_calls: u64,
        x: &NodeVector,
    ) {
        for (i, block) in x.blocks().enumerate().take(self.m) {
            self.per_node[i] = self.per_node[i].max(prog(block));
        }
        self.history.push(AuditPoint {
            iteration,
            communications,
            oracle_calls,
            prog: self.global(),
            bound: progress_bound(self.m, self.n, communications, oracle_calls),
        });
    }

    pub fn per_node(&self) -> &[usize] {
        &self.per_node
    }

    pub fn global(&self) -> usize {
        self.per_node.iter().copied().max().unwrap_or(0)
    }

    pub fn history(&self) -> &[AuditPoint] {
        &self.history
    }

    /// Audit points where prog exceeded `min(⌊4N/m⌋+1, ⌊K/n⌋+1)`.
    pub fn violations(&self) -> Vec<AuditPoint> {
        self.history
            .iter()
            .copied()
            .filter(|p| p.prog > p.bound)
            .collect()
    }
}

/// Replays `(iteration, communications, oracle_calls, iterate)` records through a counter.
pub fn progress_audit<'a>(
    m: usize,
    n: usize,
    records: impl IntoIterator<Item = (u64, u64, u64, &'a NodeVector)>,
) -> ProgressCounter {
    let mut counter = ProgressCounter::new(m, n);
    for (it, comms, calls, x) in records {
        counter.record(it, comms, calls, x);
    }
    counter
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_kappa_cancels_communication_term() {
        let b = lower_bound_value(1.0, 10.0, 100.0, 2, 5.0, 5.0).unwrap();
        assert_eq!(b.communication, Some(0.0));
    }

    #[test]
    fn zero_communications_example() {
        let b = lower_bound_value(4.0, 1.0, 100.0, 4, 0.0, 1.0).unwrap();
        let base: f64 = (3f64.sqrt() - 1.0) / (3f64.sqrt() + 1.0);
        assert!((b.communication.unwrap() - base * base).abs() < 1e-15);
        assert!((b.value - 0.0718).abs() < 1e-4);
        assert_eq!(b.computation, None);
    }

    #[test]
    fn inapplicable_everywhere_is_an_error() {
        assert!(lower_bound_value(4.0, 1.0, 10.0, 4, 1.0, 1.0).is_err());
    }

    #[test]
    fn empty_audit_starts_at_zero() {
        let c = progress_audit(3, 2, [(0, 0, 0, &NodeVector::zeros(3, 4))]);
        assert_eq!(c.global(), 0);
        assert!(c.violations().is_empty());
    }
}
