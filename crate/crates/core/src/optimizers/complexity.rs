//! Iteration and budget formulas from the convergence guarantees.

use serde::Serialize;

/// Oracle calls per node and communication rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexityBudget {
    pub oracle: f64,
    pub communication: f64,
}

/// `(n/b + (√n/b + n·Lbar/(b²L) + χ) √(L/μ)) ln(1/ε)`, one communication and
/// `b` oracle calls per iteration (plus amortized snapshot refreshes).
pub fn adom_vr_iteration_bound(
    n: usize,
    b: usize,
    l: f64,
    lbar: f64,
    mu: f64,
    chi: f64,
    eps: f64,
) -> f64 {
    let (nf, bf) = (n as f64, b as f64);
    let coupling = nf.sqrt() / bf + nf * lbar / (bf * bf * l) + chi;
    (nf / bf + coupling * (l / mu).sqrt()) * (1.0 / eps).ln()
}

/// `⌈max(√(n Lbar/L), n √(μ/L), Lbar/L)⌉` clamped to `[1, n]`.
pub fn adom_vr_batch_rule(n: usize, l: f64, lbar: f64, mu: f64) -> usize {
    let nf = n as f64;
    let raw = (nf * lbar / l)
        .sqrt()
        .max(nf * (mu / l).sqrt())
        .max(lbar / l);
    ((raw - 1e-9).ceil() as usize).clamp(1, n.max(1))
}

/// `(n + √(n Lbar/μ)) ln(1/ε)` oracle calls and `χ √(L/μ) ln(1/ε)` rounds.
pub fn adom_vr_complexity(
    n: usize,
    l: f64,
    lbar: f64,
    mu: f64,
    chi: f64,
    eps: f64,
) -> ComplexityBudget {
    let nf = n as f64;
    let log = (1.0 / eps).ln();
    ComplexityBudget {
        oracle: (nf + (nf * lbar / mu).sqrt()) * log,
        communication: chi * (l / mu).sqrt() * log,
    }
}

/// `n + √n·Lhat·Δ/ε²` oracle calls and `χ·L·Δ/ε²` rounds to reach
/// `E‖∇F‖ ≤ ε`, where `Δ = F(x⁰) − F*`.
pub fn gt_page_complexity(
    n: usize,
    l: f64,
    lhat: f64,
    chi: f64,
    delta: f64,
    eps: f64,
) -> ComplexityBudget {
    let nf = n as f64;
    let e2 = eps * eps;
    ComplexityBudget {
        oracle: nf + nf.sqrt() * lhat * delta / e2,
        communication: chi * l * delta / e2,
    }
}
