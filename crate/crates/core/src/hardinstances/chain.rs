//! Strongly convex quadratic chain split between the two ends of a two-star path.

use crate::error::{Error, Result};
use crate::network::sequence::{two_star_hop_sequence, TWO_STAR_LEFT, TWO_STAR_RIGHT};
use crate::network::GraphSequence;
use crate::objectives::{FiniteSumObjective, SmoothnessInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainRole {
    /// `μ/2‖y‖² + (L−μ)/4 [(y₁−1)² + Σ (y_{2k} − y_{2k+1})²]`
    Left,
    /// `μ/2‖y‖² + (L−μ)/4 Σ (y_{2k−1} − y_{2k})²`
    Right,
    /// `μ/(2(m−2)) ‖y‖²`
    Filler,
}

/// `f_ij(x) = g_i(x_j)` where `x_j` is the `j`-th slot of length `dim`; the
/// full variable has length `n · dim`.
#[derive(Debug, Clone)]
pub struct ChainInstance {
    m: usize,
    n: usize,
    dim: usize,
    l: f64,
    mu: f64,
    q: f64,
    roles: Vec<ChainRole>,
    smoothness: SmoothnessInfo,
}

/// `(√κ' − 1)/(√κ' + 1)` with `κ' = 2κ/3 + 1/3`.
pub fn chain_ratio(kappa: f64) -> f64 {
    let s = (2.0 * kappa / 3.0 + 1.0 / 3.0).sqrt();
    (s - 1.0) / (s + 1.0)
}

pub fn strongly_convex_chain(
    m: usize,
    n: usize,
    l: f64,
    mu: f64,
    dim: usize,
) -> Result<ChainInstance> {
    if m < 3 {
        return Err(Error::InvalidParameter(format!(
            "chain instance needs m >= 3, got {m}"
        )));
    }
    if n == 0 || dim == 0 {
        return Err(Error::InvalidParameter("need n >= 1 and dim >= 1".into()));
    }
    if !(l > mu && mu > 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need L > mu > 0, got L={l}, mu={mu}"
        )));
    }
    let roles: Vec<ChainRole> = (0..m)
        .map(|v| match v {
            TWO_STAR_LEFT => ChainRole::Left,
            TWO_STAR_RIGHT => ChainRole::Right,
            _ => ChainRole::Filler,
        })
        .collect();
    let filler = mu / (m - 2) as f64;
    let l_ij = roles
        .iter()
        .map(|r| match r {
            ChainRole::Filler => vec![filler; n],
            _ => vec![l; n],
        })
        .collect();
    // F_i = (1/n) Σ_j g_i(x_j): block-diagonal Hessian scaled by 1/n
    let nf = n as f64;
    let smoothness = SmoothnessInfo::new(l / nf, filler.min(mu) / nf, l_ij, l / nf.sqrt())?;
    Ok(ChainInstance {
        m,
        n,
        dim,
        l,
        mu,
        q: chain_ratio(l / mu),
        roles,
        smoothness,
    })
}

impl ChainInstance {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn slot_dim(&self) -> usize {
        self.dim
    }

    pub fn role(&self, node: usize) -> ChainRole {
        self.roles[node]
    }

    /// `q^{2 dim} / (1 − q²)`, squared ℓ₂ mass dropped by truncation.
    pub fn tail_bound(&self) -> f64 {
        self.q.powi(2 * self.dim as i32) / (1.0 - self.q * self.q)
    }

    /// Untruncated minimizer restricted to the first `dim` coordinates of
    /// every slot: `(q, q², …, q^dim)`.
    pub fn x_star(&self) -> Vec<f64> {
        let slot: Vec<f64> = (1..=self.dim).map(|k| self.q.powi(k as i32)).collect();
        slot.repeat(self.n)
    }

    /// Exact minimizer of the truncated problem (tridiagonal solve per slot).
    pub fn truncated_minimizer(&self) -> Vec<f64> {
        let d = self.dim;
        let c = 0.5 * (self.l - self.mu);
        // aggregate Hessian: 3μ I + c · (path Laplacian on 1..d + e₁e₁ᵀ)
        let mut diag = vec![3.0 * self.mu; d];
        let off = vec![-c; d.saturating_sub(1)];
        for (k, dk) in diag.iter_mut().enumerate() {
            let degree = usize::from(k > 0) + usize::from(k + 1 < d) + usize::from(k == 0);
            *dk += c * degree as f64;
        }
        let mut rhs = vec![0.0; d];
        rhs[0] = c;
        // Thomas algorithm
        let mut cp = vec![0.0; d];
        let mut dp = vec![0.0; d];
        for k in 0..d {
            let lower = if k > 0 { off[k - 1] } else { 0.0 };
            let denom = diag[k] - lower * if k > 0 { cp[k - 1] } else { 0.0 };
            cp[k] = if k + 1 < d { off[k] / denom } else { 0.0 };
            dp[k] = (rhs[k] - lower * if k > 0 { dp[k - 1] } else { 0.0 }) / denom;
        }
        let mut y = vec![0.0; d];
        for k in (0..d).rev() {
            y[k] = dp[k] - if k + 1 < d { cp[k] * y[k + 1] } else { 0.0 };
        }
        y.repeat(self.n)
    }

    /// The two-star hop sequence these roles are laid out for.
    pub fn sequence(&self) -> Result<GraphSequence> {
        two_star_hop_sequence(self.m)
    }

    fn slot_value(&self, node: usize, y: &[f64]) -> f64 {
        let sq: f64 = y.iter().map(|v| v * v).sum();
        let c = 0.25 * (self.l - self.mu);
        match self.roles[node] {
            ChainRole::Filler => 0.5 * self.mu / (self.m - 2) as f64 * sq,
            ChainRole::Left => {
                let mut s = (y[0] - 1.0).powi(2);
                let mut k = 2;
                while k < y.len() {
                    s += (y[k - 1] - y[k]).powi(2);
                    k += 2;
                }
                0.5 * self.mu * sq + c * s
            }
            ChainRole::Right => {
                let mut s = 0.0;
                let mut k = 1;
                while k < y.len() {
                    s += (y[k - 1] - y[k]).powi(2);
                    k += 2;
                }
                0.5 * self.mu * sq + c * s
            }
        }
    }

    fn slot_gradient(&self, node: usize, y: &[f64], out: &mut [f64]) {
        let c = 0.5 * (self.l - self.mu);
        let quad = match self.roles[node] {
            ChainRole::Filler => self.mu / (self.m - 2) as f64,
            _ => self.mu,
        };
        for (o, v) in out.iter_mut().zip(y) {
            *o = quad * v;
        }
        // 0-based index of the first pair member: Left pairs (2,3),(4,5)…, Right pairs (1,2),(3,4)…
        let first = match self.roles[node] {
            ChainRole::Filler => return,
            ChainRole::Left => {
                out[0] += c * (y[0] - 1.0);
                1
            }
            ChainRole::Right => 0,
        };
        let mut a = first;
        while a + 1 < y.len() {
            let diff = c * (y[a] - y[a + 1]);
            out[a] += diff;
            out[a + 1] -= diff;
            a += 2;
        }
    }
}

impl FiniteSumObjective for ChainInstance {
    fn nodes(&self) -> usize {
        self.m
    }

    fn components(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.n * self.dim
    }

    fn component_value(&self, node: usize, component: usize, x: &[f64]) -> f64 {
        let d = self.dim;
        self.slot_value(node, &x[component * d..(component + 1) * d])
    }

    fn component_gradient(&self, node: usize, component: usize, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        out.iter_mut().for_each(|v| *v = 0.0);
        self.slot_gradient(
            node,
            &x[component * d..(component + 1) * d],
            &mut out[component * d..(component + 1) * d],
        );
    }

    fn smoothness(&self) -> &SmoothnessInfo {
        &self.smoothness
    }
}
