//! Nonconvex zero-chain construction on a rotating star.

use super::ProgressCounter;
use crate::error::{Error, Result};
use crate::network::sequence::{default_star_partition, rotating_star_sequence};
use crate::network::GraphSequence;
use crate::objectives::{FiniteSumObjective, SmoothnessInfo};

/// Smoothness of `l`.
pub const L0: f64 = 152.0;
/// `l(x) − inf l ≤ Δ₀ d`.
pub const DELTA0: f64 = 12.0;
/// `‖∇l‖_∞ ≤ G₀`.
pub const G0: f64 = 23.0;

/// Smooth bump: 0 on `z ≤ 1/2`, `exp(1 − 1/(2z−1)²)` above.
pub fn psi(z: f64) -> f64 {
    if z <= 0.5 {
        0.0
    } else {
        let t = 2.0 * z - 1.0;
        (1.0 - 1.0 / (t * t)).exp()
    }
}

pub fn psi_derivative(z: f64) -> f64 {
    let p = psi(z);
    if p == 0.0 {
        return 0.0;
    }
    let t = 2.0 * z - 1.0;
    p * 4.0 / (t * t * t)
}

const SQRT_E: f64 = 1.648_721_270_700_128_2;

/// `√e ∫_{−∞}^{z} e^{−t²/2} dt` in closed form.
pub fn phi(z: f64) -> f64 {
    SQRT_E * (std::f64::consts::PI / 2.0).sqrt() * libm::erfc(-z / std::f64::consts::SQRT_2)
}

pub fn phi_derivative(z: f64) -> f64 {
    SQRT_E * (-0.5 * z * z).exp()
}

/// Largest 1-based index of a nonzero entry; 0 for the zero vector.
pub fn prog(x: &[f64]) -> usize {
    x.iter().rposition(|&v| v != 0.0).map_or(0, |k| k + 1)
}

/// Term `j` (1-based) of `l`: the anchor `−Ψ(1)Φ(x₁)` for `j = 1`, the link
/// `Ψ(−x_{j−1})Φ(−x_j) − Ψ(x_{j−1})Φ(x_j)` otherwise.
fn term_value(j: usize, x: &[f64]) -> f64 {
    if j == 1 {
        return -psi(1.0) * phi(x[0]);
    }
    let (prev, cur) = (x[j - 2], x[j - 1]);
    psi(-prev) * phi(-cur) - psi(prev) * phi(cur)
}

/// Adds `scale · ∇term_j(x)` into `out`.
fn term_gradient(j: usize, x: &[f64], scale: f64, out: &mut [f64]) {
    if j == 1 {
        out[0] -= scale * psi(1.0) * phi_derivative(x[0]);
        return;
    }
    let (prev, cur) = (x[j - 2], x[j - 1]);
    out[j - 2] -= scale * (psi_derivative(-prev) * phi(-cur) + psi_derivative(prev) * phi(cur));
    out[j - 1] -= scale * (psi(-prev) * phi_derivative(-cur) + psi(prev) * phi_derivative(cur));
}

/// Value and gradient of `l(x) = −Ψ(1)Φ(x₁) + Σ_{j=2}^{d} [Ψ(−x_{j−1})Φ(−x_j) − Ψ(x_{j−1})Φ(x_j)]`.
pub fn zero_chain_l(x: &[f64]) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; x.len()];
    let mut value = 0.0;
    for j in 1..=x.len() {
        value += term_value(j, x);
        term_gradient(j, x, 1.0, &mut grad);
    }
    (value, grad)
}

/// Which half of the chain a node holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainHalf {
    /// Anchor plus odd links.
    Odd,
    /// Even links.
    Even,
    /// The zero function.
    Silent,
}

/// First term index of block `k` (0-based) for a half, and the stride `2n`.
fn block_terms(half: ChainHalf, k: usize, n: usize, d: usize) -> impl Iterator<Item = usize> {
    let start = match half {
        ChainHalf::Odd => 2 * k + 1,
        ChainHalf::Even => 2 * k + 2,
        ChainHalf::Silent => d + 1,
    };
    (start..=d).step_by(2 * n)
}

/// Value of block `k` of a half, `n ×` its terms (without the outer scale).
pub fn split_block_value(half: ChainHalf, k: usize, n: usize, x: &[f64]) -> f64 {
    block_terms(half, k, n, x.len())
        .map(|j| term_value(j, x))
        .sum::<f64>()
        * n as f64
}

/// Gradient of [`split_block_value`].
pub fn split_block_gradient(half: ChainHalf, k: usize, n: usize, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for j in block_terms(half, k, n, x.len()) {
        term_gradient(j, x, n as f64, &mut out);
    }
    out
}

/// Node functions `F_i(x) = (L C² / 3L₀) · (m / ⌈m/3⌉) · l̂(x / C)` on S₁ (odd
/// half) and S₂ (even half), zero on S₃, each split into `n` blocks.
#[derive(Debug, Clone)]
pub struct ZeroChainInstance {
    m: usize,
    n: usize,
    d: usize,
    scale_c: f64,
    l: f64,
    delta: f64,
    roles: Vec<ChainHalf>,
    smoothness: SmoothnessInfo,
}

impl ZeroChainInstance {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn scale(&self) -> f64 {
        self.scale_c
    }

    pub fn role(&self, node: usize) -> ChainHalf {
        self.roles[node]
    }

    /// `L C² Δ₀ d / (3 L₀)`, the construction's bound on `F(0) − inf F`.
    pub fn gap_bound(&self) -> f64 {
        self.l * self.scale_c * self.scale_c * DELTA0 * self.d as f64 / (3.0 * L0)
    }

    pub fn target_gap(&self) -> f64 {
        self.delta
    }

    /// `(L C² / 3L₀) · (m/⌈m/3⌉)`; block functions add a factor `n`.
    fn value_scale(&self) -> f64 {
        let share = self.m as f64 / self.m.div_ceil(3) as f64;
        self.l * self.scale_c * self.scale_c / (3.0 * L0) * share
    }

    /// `min(⌊4N/m⌋ + 1, ⌊K/n⌋ + 1)`.
    pub fn progress_bound(&self, communications: u64, oracle_calls: u64) -> usize {
        progress_bound(self.m, self.n, communications, oracle_calls)
    }

    pub fn progress_counter(&self) -> ProgressCounter {
        ProgressCounter::new(self.m, self.n)
    }
}

/// `min(⌊4N/m⌋ + 1, ⌊K/n⌋ + 1)`.
pub fn progress_bound(m: usize, n: usize, communications: u64, oracle_calls: u64) -> usize {
    let by_comms = 4 * communications / m as u64 + 1;
    let by_oracle = oracle_calls / n as u64 + 1;
    by_comms.min(by_oracle) as usize
}

/// Builds the instance for communication budget `N` and per-node oracle budget `K`,
/// together with its rotating-star sequence (default S₁/S₂ split).
pub fn nonconvex_hard_objective(
    m: usize,
    n: usize,
    l: f64,
    delta: f64,
    comm_budget: u64,
    oracle_budget: u64,
) -> Result<(ZeroChainInstance, GraphSequence)> {
    if m < 3 {
        return Err(Error::InvalidParameter(format!("need m >= 3, got {m}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("need n >= 1".into()));
    }
    if !(l > 0.0 && delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need L > 0 and Delta > 0, got {l}, {delta}"
        )));
    }
    if (comm_budget as f64) < m as f64 / 4.0 {
        return Err(Error::InvalidParameter(format!(
            "communication budget {comm_budget} is below m/4 = {}",
            m as f64 / 4.0
        )));
    }
    if oracle_budget < n as u64 {
        return Err(Error::InvalidParameter(format!(
            "oracle budget {oracle_budget} is below n = {n}"
        )));
    }
    let d = 2 + (4 * comm_budget / m as u64).min(oracle_budget / n as u64) as usize;
    let denom = (16.0 * comm_budget as f64 / m as f64).min(4.0 * oracle_budget as f64 / n as f64);
    let scale_c = (3.0 * L0 * delta / (l * DELTA0 * denom)).sqrt();

    let (s1, s2) = default_star_partition(m);
    let seq = rotating_star_sequence(m, &s1, &s2)?;
    let mut roles = vec![ChainHalf::Silent; m];
    s1.iter().for_each(|&v| roles[v] = ChainHalf::Odd);
    s2.iter().for_each(|&v| roles[v] = ChainHalf::Even);

    // block k holds n× a disjoint slice of one half, hence n L per block
    // and (1/n) Σ_k ‖Δ∇f_ik‖² = n ‖Δ∇F_i‖² ≤ n L² ‖Δx‖².
    let l_ij = roles
        .iter()
        .map(|r| match r {
            ChainHalf::Silent => vec![0.0; n],
            _ => vec![n as f64 * l; n],
        })
        .collect();
    let smoothness = SmoothnessInfo::new(l, 0.0, l_ij, (n as f64).sqrt() * l)?;
    Ok((
        ZeroChainInstance {
            m,
            n,
            d,
            scale_c,
            l,
            delta,
            roles,
            smoothness,
        },
        seq,
    ))
}

impl FiniteSumObjective for ZeroChainInstance {
    fn nodes(&self) -> usize {
        self.m
    }

    fn components(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn component_value(&self, node: usize, component: usize, x: &[f64]) -> f64 {
        let half = self.roles[node];
        if half == ChainHalf::Silent {
            return 0.0;
        }
        let scaled: Vec<f64> = x.iter().map(|v| v / self.scale_c).collect();
        self.value_scale() * split_block_value(half, component, self.n, &scaled)
    }

    fn component_gradient(&self, node: usize, component: usize, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let half = self.roles[node];
        if half == ChainHalf::Silent {
            return;
        }
        let scaled: Vec<f64> = x.iter().map(|v| v / self.scale_c).collect();
        let factor = self.value_scale() / self.scale_c * self.n as f64;
        for j in block_terms(half, component, self.n, self.d) {
            term_gradient(j, &scaled, factor, out);
        }
    }

    fn smoothness(&self) -> &SmoothnessInfo {
        &self.smoothness
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_and_integral_values() {
        assert_eq!(psi(0.5), 0.0);
        assert_eq!(psi(-3.0), 0.0);
        assert!((psi(1.0) - 1.0).abs() < 1e-15);
        assert!((phi(0.0) - SQRT_E * (2.0 * std::f64::consts::PI).sqrt() / 2.0).abs() < 1e-14);
        assert!((phi(0.0) - 2.0664).abs() < 1e-4);
        assert_eq!(psi_derivative(0.5000001), 0.0);
    }

    #[test]
    fn prog_examples() {
        assert_eq!(prog(&[0.0, 0.0]), 0);
        assert_eq!(prog(&[1.0, 0.0, 0.0]), 1);
        assert_eq!(prog(&[0.0, 2.0, 0.0, 3.0, 0.0]), 4);
    }

    #[test]
    fn gradient_at_origin_touches_first_coordinate_only() {
        let (_, g) = zero_chain_l(&[0.0; 6]);
        assert!(g[0] != 0.0);
        assert_eq!(prog(&g), 1);
    }

    #[test]
    fn blocks_partition_the_terms() {
        let (n, d) = (3, 17);
        for half in [ChainHalf::Odd, ChainHalf::Even] {
            let mut seen = vec![0; d + 1];
            for k in 0..n {
                for j in block_terms(half, k, n, d) {
                    seen[j] += 1;
                }
            }
            for (j, &c) in seen.iter().enumerate().skip(1) {
                let owned = match half {
                    ChainHalf::Odd => j % 2 == 1,
                    _ => j % 2 == 0,
                };
                assert_eq!(c, usize::from(owned), "{half:?} term {j}");
            }
        }
    }

    #[test]
    fn budgets_validated() {
        assert!(nonconvex_hard_objective(2, 2, 1.0, 1.0, 10, 10).is_err());
        assert!(nonconvex_hard_objective(8, 2, 1.0, 1.0, 1, 10).is_err());
        assert!(nonconvex_hard_objective(8, 4, 1.0, 1.0, 10, 3).is_err());
        let (inst, seq) = nonconvex_hard_objective(9, 4, 1.0, 1.0, 200, 400).unwrap();
        assert_eq!(inst.dim(), 2 + 88);
        assert_eq!(seq.node_count(), 9);
        assert!(inst.gap_bound() <= inst.target_gap() * (1.0 + 1e-12));
    }
}
