use serde::Serialize;

use crate::error::{Error, Result};

/// Relative slack allowed when checking the ordering invariants.
const ORDER_SLACK: f64 = 1e-9;

/// Smoothness and strong-convexity constants of a finite-sum objective.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessInfo {
    /// Uniform smoothness of every `F_i`.
    pub l: f64,
    /// Strong convexity of every `F_i`; 0 when nonconvex.
    pub mu: f64,
    /// `l_ij[i][j]`, smoothness of `f_ij`.
    pub l_ij: Vec<Vec<f64>>,
    /// `(1/n) Σ_j L_ij` per node.
    pub lbar_i: Vec<f64>,
    pub lbar: f64,
    /// Average smoothness: `(1/n) Σ_j ‖∇f_ij(x) − ∇f_ij(y)‖² ≤ Lhat² ‖x − y‖²`.
    pub lhat: f64,
}

impl SmoothnessInfo {
    /// Derives `Lbar_i` and `Lbar` from `l_ij` and checks the invariants.
    pub fn new(l: f64, mu: f64, l_ij: Vec<Vec<f64>>, lhat: f64) -> Result<Self> {
        let lbar_i: Vec<f64> = l_ij
            .iter()
            .map(|row| row.iter().sum::<f64>() / row.len().max(1) as f64)
            .collect();
        let lbar = lbar_i.iter().copied().fold(0.0, f64::max);
        let info = Self {
            l,
            mu,
            l_ij,
            lbar_i,
            lbar,
            lhat,
        };
        info.validate()?;
        Ok(info)
    }

    pub fn nodes(&self) -> usize {
        self.l_ij.len()
    }

    pub fn components(&self) -> usize {
        self.l_ij.first().map_or(0, Vec::len)
    }

    /// `L / mu`; infinite when `mu = 0`.
    pub fn condition_number(&self) -> f64 {
        self.l / self.mu
    }

    pub fn max_component(&self) -> f64 {
        self.l_ij.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// `L ≤ Lbar ≤ nL`, `L ≤ Lhat ≤ √n L`, `mu ≤ L`, everything finite and nonnegative.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let all = [self.l, self.mu, self.lbar, self.lhat];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0)
            || self
                .l_ij
                .iter()
                .flatten()
                .any(|v| !v.is_finite() || *v < 0.0)
        {
            return bad(format!(
                "smoothness constants must be finite and nonnegative: {all:?}"
            ));
        }
        if self.l <= 0.0 {
            return bad("L must be positive".into());
        }
        let n = self.components() as f64;
        let up = 1.0 + ORDER_SLACK;
        let down = 1.0 - ORDER_SLACK;
        if self.mu > self.l * up {
            return bad(format!("mu = {} exceeds L = {}", self.mu, self.l));
        }
        if self.lbar < self.l * down || self.lbar > n * self.l * up {
            return bad(format!(
                "Lbar = {} outside [L, nL] = [{}, {}]",
                self.lbar,
                self.l,
                n * self.l
            ));
        }
        if self.lhat < self.l * down || self.lhat > n.sqrt() * self.l * up {
            return bad(format!(
                "Lhat = {} outside [L, sqrt(n) L] = [{}, {}]",
                self.lhat,
                self.l,
                n.sqrt() * self.l
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_means() {
        let s = SmoothnessInfo::new(2.0, 0.5, vec![vec![2.0, 4.0], vec![3.0, 3.0]], 2.5).unwrap();
        assert_eq!(s.lbar_i, vec![3.0, 3.0]);
        assert_eq!(s.lbar, 3.0);
        assert_eq!(s.max_component(), 4.0);
        assert_eq!(s.condition_number(), 4.0);
    }

    #[test]
    fn ordering_enforced() {
        assert!(SmoothnessInfo::new(1.0, 2.0, vec![vec![1.0]], 1.0).is_err());
        assert!(SmoothnessInfo::new(1.0, 0.0, vec![vec![5.0, 5.0]], 1.0).is_err());
        assert!(SmoothnessInfo::new(1.0, 0.0, vec![vec![1.0, 1.0]], 2.0).is_err());
        assert!(SmoothnessInfo::new(1.0, 0.0, vec![vec![1.0, 1.0]], 0.5).is_err());
        assert!(SmoothnessInfo::new(1.0, 0.0, vec![vec![1.0, 1.0]], f64::NAN).is_err());
    }
}
