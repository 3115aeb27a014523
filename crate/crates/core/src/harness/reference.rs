use serde::Serialize;

use crate::error::{Error, Result};
use crate::objectives::{average_gradient, average_value, FiniteSumObjective};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const MAX_ITERATIONS: u64 = 10_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: u64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Minimizer of `(1/m) Σ_i F_i` by Nesterov's method for strongly convex
/// functions, restarted whenever the objective increases. Stops once
/// `‖∇F‖ ≤ tolerance · max(1, ‖∇F(0)‖)`.
pub fn reference_solution(
    obj: &dyn FiniteSumObjective,
    tolerance: f64,
) -> Result<ReferenceSolution> {
    let s = obj.smoothness();
    if s.mu.is_nan() || s.mu <= 0.0 {
        return Err(Error::InvalidParameter(
            "a reference minimizer needs a strongly convex objective (mu > 0)".into(),
        ));
    }
    let d = obj.dim();
    let step = 1.0 / s.l;
    let q = (s.l / s.mu).sqrt();
    let beta = (q - 1.0) / (q + 1.0);
    let mut x = vec![0.0; d];
    let g0 = average_gradient(obj, &x);
    let target = tolerance * norm(&g0).max(1.0);
    let mut prev = x.clone();
    let mut value = average_value(obj, &x);
    let mut best = (norm(&g0), x.clone());
    for it in 0..MAX_ITERATIONS {
        let y: Vec<f64> = x
            .iter()
            .zip(&prev)
            .map(|(a, b)| a + beta * (a - b))
            .collect();
        let g = average_gradient(obj, &y);
        let next: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        let next_value = average_value(obj, &next);
        prev = std::mem::replace(&mut x, next);
        if next_value > value {
            // restart the momentum
            prev.clone_from(&x);
        }
        value = next_value;
        let gx = average_gradient(obj, &x);
        let gn = norm(&gx);
        if gn < best.0 {
            best = (gn, x.clone());
        }
        if gn <= target {
            return Ok(ReferenceSolution {
                value,
                grad_norm: gn,
                x,
                iterations: it + 1,
            });
        }
        if !gn.is_finite() {
            return Err(Error::NoConvergence(format!(
                "gradient became non-finite at iteration {it}"
            )));
        }
    }
    Err(Error::NoConvergence(format!(
        "gradient norm {:.3e} above {target:.3e} after {MAX_ITERATIONS} iterations",
        best.0
    )))
}
