use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::smoothness::SmoothnessInfo;
use super::FiniteSumObjective;
use crate::error::{Error, Result};
use crate::network::mixing::gaussian;
use crate::rng;

/// `f_ij(x) = ½ xᵀ A_ij x − b_ijᵀ x` with symmetric PSD `A_ij`.
///
/// All constants are exact: `L_ij = λ_max(A_ij)`, `L` and `mu` come from the
/// spectrum of `mean_j A_ij`, and `Lhat² = λ_max(mean_j A_ij²)`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    nodes: usize,
    components: usize,
    dim: usize,
    a: Vec<DMatrix<f64>>,
    b: Vec<DVector<f64>>,
    smoothness: SmoothnessInfo,
}

impl QuadraticObjective {
    /// `a[i*n + j]` and `b[i*n + j]` describe component `(i, j)`.
    pub fn new(
        nodes: usize,
        components: usize,
        a: Vec<DMatrix<f64>>,
        b: Vec<DVector<f64>>,
    ) -> Result<Self> {
        if nodes == 0 || components == 0 || a.len() != nodes * components || b.len() != a.len() {
            return Err(Error::InvalidParameter(format!(
                "need {} matrices and vectors for {nodes} nodes x {components} components",
                nodes * components
            )));
        }
        let dim = b[0].len();
        for (k, (ak, bk)) in a.iter().zip(&b).enumerate() {
            if ak.nrows() != dim || ak.ncols() != dim || bk.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "component {k} is not {dim}-dimensional"
                )));
            }
            if (ak - ak.transpose()).amax() > 1e-12 * ak.amax().max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "A of component {k} is not symmetric"
                )));
            }
        }
        let eig = |m: &DMatrix<f64>| -> (f64, f64) {
            let ev = m.symmetric_eigenvalues();
            (ev.min(), ev.max())
        };
        let mut l_ij = vec![vec![0.0; components]; nodes];
        let (mut l, mut mu, mut lhat_sq) = (0.0_f64, f64::INFINITY, 0.0_f64);
        for i in 0..nodes {
            let mut mean = DMatrix::zeros(dim, dim);
            let mut mean_sq = DMatrix::zeros(dim, dim);
            for j in 0..components {
                let aij = &a[i * components + j];
                let (lo, hi) = eig(aij);
                if lo < -1e-10 * hi.abs().max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "A of component ({i}, {j}) is not positive semidefinite"
                    )));
                }
                l_ij[i][j] = hi.max(0.0);
                mean += aij / components as f64;
                mean_sq += aij * aij / components as f64;
            }
            let (lo, hi) = eig(&mean);
            l = l.max(hi);
            mu = mu.min(lo.max(0.0));
            lhat_sq = lhat_sq.max(eig(&mean_sq).1);
        }
        let lhat = lhat_sq.sqrt().max(l);
        let smoothness = SmoothnessInfo::new(l, mu, l_ij, lhat)?;
        Ok(Self {
            nodes,
            components,
            dim,
            a,
            b,
            smoothness,
        })
    }

    /// Random instance with component spectra in `[mu, l]` and Gaussian `b`.
    pub fn random(
        nodes: usize,
        components: usize,
        dim: usize,
        mu: f64,
        l: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(0.0 <= mu && mu <= l && l > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= mu <= L, L > 0: mu={mu}, L={l}"
            )));
        }
        let mut a = Vec::with_capacity(nodes * components);
        let mut b = Vec::with_capacity(nodes * components);
        for k in 0..nodes * components {
            let mut r = rng::substream(seed, &[rng::tag::INIT, k as u64]);
            let raw = DMatrix::from_fn(dim, dim, |_, _| gaussian(&mut r));
            let q = raw.qr().q();
            let spectrum = DVector::from_fn(dim, |_, _| mu + (l - mu) * r.gen::<f64>());
            let mut ak = &q * DMatrix::from_diagonal(&spectrum) * q.transpose();
            ak = (&ak + ak.transpose()) * 0.5;
            a.push(ak);
            b.push(DVector::from_fn(dim, |_, _| gaussian(&mut r)));
        }
        Self::new(nodes, components, a, b)
    }

    pub fn matrix(&self, node: usize, component: usize) -> &DMatrix<f64> {
        &self.a[node * self.components + component]
    }

    pub fn offset(&self, node: usize, component: usize) -> &DVector<f64> {
        &self.b[node * self.components + component]
    }

    /// Minimizer of `(1/m) Σ_i F_i` via a dense solve.
    pub fn minimizer(&self) -> Result<Vec<f64>> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        let mut g = DVector::zeros(self.dim);
        for (ak, bk) in self.a.iter().zip(&self.b) {
            h += ak;
            g += bk;
        }
        h.cholesky()
            .map(|c| c.solve(&g).iter().copied().collect())
            .ok_or_else(|| Error::NoConvergence("average Hessian is singular".into()))
    }
}

impl FiniteSumObjective for QuadraticObjective {
    fn nodes(&self) -> usize {
        self.nodes
    }

    fn components(&self) -> usize {
        self.components
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn component_value(&self, node: usize, component: usize, x: &[f64]) -> f64 {
        let a = self.matrix(node, component);
        let b = self.offset(node, component);
        let xv = DVector::from_column_slice(x);
        0.5 * xv.dot(&(a * &xv)) - b.dot(&xv)
    }

    fn component_gradient(&self, node: usize, component: usize, x: &[f64], out: &mut [f64]) {
        let a = self.matrix(node, component);
        let b = self.offset(node, component);
        let d = self.dim;
        for r in 0..d {
            let mut acc = -b[r];
            for c in 0..d {
                acc += a[(r, c)] * x[c];
            }
            out[r] = acc;
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
    fn constants_of_diagonal_instance() {
        let a = vec![
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0])),
            DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0])),
        ];
        let b = vec![DVector::zeros(2), DVector::zeros(2)];
        let q = QuadraticObjective::new(1, 2, a, b).unwrap();
        let s = q.smoothness();
        assert!((s.l - 2.0).abs() < 1e-12);
        assert!((s.mu - 2.0).abs() < 1e-12);
        assert_eq!(s.l_ij, vec![vec![3.0, 3.0]]);
        assert!((s.lhat - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn random_instance_minimizer_is_stationary() {
        let q = QuadraticObjective::random(3, 4, 5, 0.5, 4.0, 9).unwrap();
        let x = q.minimizer().unwrap();
        let g = super::super::average_gradient(&q, &x);
        assert!(g.iter().all(|v| v.abs() < 1e-10), "{g:?}");
    }

    #[test]
    fn rejects_indefinite() {
        let a = vec![DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]))];
        assert!(QuadraticObjective::new(1, 1, a, vec![DVector::zeros(2)]).is_err());
    }
}
