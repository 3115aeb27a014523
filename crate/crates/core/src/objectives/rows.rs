//! Generalized linear losses over data rows: `f_ij(w) = mean_r ℓ(⟨a_r, w⟩, y_r) + (λ/2)‖w‖²`.

use nalgebra::DMatrix;
use rand::Rng;

use super::shard::DatasetShard;
use super::smoothness::SmoothnessInfo;
use super::FiniteSumObjective;
use crate::error::{Error, Result};
use crate::network::mixing::gaussian;
use crate::network::node_vector::{axpy, dist_sq, dot, norm_sq};
use crate::rng;

/// Scalar loss `ℓ(z, y)` of a margin `z = ⟨a, w⟩`.
pub trait RowLoss: Send + Sync {
    fn value(&self, z: f64, y: f64) -> f64;
    /// `∂ℓ/∂z`.
    fn derivative(&self, z: f64, y: f64) -> f64;
    /// Upper bound on `|∂²ℓ/∂z²|` over all `z`, for the given labels.
    fn curvature_bound(&self, labels: &[f64]) -> f64;
    fn is_convex(&self) -> bool;
    fn check_label(&self, y: f64) -> Result<()>;
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `log(1 + exp(−y z))` with `y ∈ {−1, +1}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogisticLoss;

impl RowLoss for LogisticLoss {
    fn value(&self, z: f64, y: f64) -> f64 {
        softplus(-y * z)
    }

    fn derivative(&self, z: f64, y: f64) -> f64 {
        -y * sigmoid(-y * z)
    }

    fn curvature_bound(&self, _labels: &[f64]) -> f64 {
        0.25
    }

    fn is_convex(&self) -> bool {
        true
    }

    fn check_label(&self, y: f64) -> Result<()> {
        if y == 1.0 || y == -1.0 {
            Ok(())
        } else {
            Err(Error::InvalidData(format!(
                "logistic loss needs labels in {{-1, +1}}, got {y}"
            )))
        }
    }
}

/// `(y − σ(z))²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SigmoidSquaresLoss;

impl RowLoss for SigmoidSquaresLoss {
    fn value(&self, z: f64, y: f64) -> f64 {
        let r = sigmoid(z) - y;
        r * r
    }

    fn derivative(&self, z: f64, y: f64) -> f64 {
        let s = sigmoid(z);
        2.0 * (s - y) * s * (1.0 - s)
    }

    fn curvature_bound(&self, labels: &[f64]) -> f64 {
        // ℓ'' = 2(σ'² + (σ − y)σ''), |σ'| ≤ 1/4, |σ''| ≤ 1/(6√3)
        let residual = labels
            .iter()
            .map(|y| y.abs().max((1.0 - y).abs()))
            .fold(1.0, f64::max);
        2.0 * (1.0 / 16.0 + residual / (6.0 * 3f64.sqrt()))
    }

    fn is_convex(&self) -> bool {
        false
    }

    fn check_label(&self, y: f64) -> Result<()> {
        if y.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidData(format!("non-finite label {y}")))
        }
    }
}

/// Settings for the empirical average-smoothness estimate of the sigmoid loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NllsOptions {
    pub lambda: f64,
    pub pairs: usize,
    pub radius: f64,
    pub safety: f64,
    pub seed: u64,
}

impl Default for NllsOptions {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            pairs: 1000,
            radius: 10.0,
            safety: 1.2,
            seed: 0,
        }
    }
}

/// Row-based finite sum over one shard per node.
#[derive(Debug, Clone)]
pub struct RowObjective<L> {
    loss: L,
    lambda: f64,
    shards: Vec<DatasetShard>,
    dim: usize,
    components: usize,
    smoothness: SmoothnessInfo,
}

impl<L: RowLoss> RowObjective<L> {
    fn assemble(loss: L, shards: Vec<DatasetShard>, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "regularization must be finite and nonnegative, got {lambda}"
            )));
        }
        let first = shards
            .first()
            .ok_or_else(|| Error::InvalidData("no shards".into()))?;
        let (dim, components) = (first.dim(), first.components());
        for (i, s) in shards.iter().enumerate() {
            if s.node() != i {
                return Err(Error::InvalidData(format!(
                    "shard {i} is tagged with node {}",
                    s.node()
                )));
            }
            if s.dim() != dim || s.components() != components {
                return Err(Error::InvalidData(format!(
                    "shard {i} has dim {} and {} components, expected {dim} and {components}",
                    s.dim(),
                    s.components()
                )));
            }
            for &y in s.labels() {
                loss.check_label(y)?;
            }
        }
        if dim == 0 {
            return Err(Error::InvalidData("zero-dimensional features".into()));
        }
        let placeholder = SmoothnessInfo {
            l: 0.0,
            mu: 0.0,
            l_ij: Vec::new(),
            lbar_i: Vec::new(),
            lbar: 0.0,
            lhat: 0.0,
        };
        Ok(Self {
            loss,
            lambda,
            shards,
            dim,
            components,
            smoothness: placeholder,
        })
    }

    pub fn shards(&self) -> &[DatasetShard] {
        &self.shards
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn loss(&self) -> &L {
        &self.loss
    }

    fn all_labels(&self) -> Vec<f64> {
        self.shards
            .iter()
            .flat_map(|s| s.labels().iter().copied())
            .collect()
    }

    /// `L_ij = c · max_r ‖a_r‖² + λ` and the exact Gram bound on each `F_i`.
    fn curvature_constants(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let c = self.loss.curvature_bound(&self.all_labels());
        let d = self.dim;
        let n = self.components as f64;
        let mut l_ij = Vec::with_capacity(self.shards.len());
        let mut l_i = Vec::with_capacity(self.shards.len());
        for s in &self.shards {
            let mut row = Vec::with_capacity(self.components);
            let mut gram = DMatrix::<f64>::zeros(d, d);
            for j in 0..self.components {
                let block = s.block(j);
                let weight = 1.0 / (n * block.len() as f64);
                let mut widest: f64 = 0.0;
                for &r in block {
                    let a = s.row(r);
                    widest = widest.max(norm_sq(a));
                    let av = nalgebra::DVector::from_column_slice(a);
                    gram.ger(weight, &av, &av, 1.0);
                }
                row.push(c * widest + self.lambda);
            }
            let top = gram
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(0.0, f64::max);
            l_i.push(c * top + self.lambda);
            l_ij.push(row);
        }
        (l_ij, l_i)
    }
}

fn finish_constants(
    l_ij: Vec<Vec<f64>>,
    l_i: &[f64],
    mu: f64,
    lhat_of: impl FnOnce(f64) -> f64,
) -> Result<SmoothnessInfo> {
    let n = l_ij.first().map_or(1, Vec::len) as f64;
    let max_component = l_ij.iter().flatten().copied().fold(0.0, f64::max);
    let l = l_i.iter().copied().fold(max_component / n, f64::max);
    let lhat = lhat_of(l).clamp(l, n.sqrt() * l);
    SmoothnessInfo::new(l, mu.min(l), l_ij, lhat)
}

/// Mean-square bound over components: `sqrt((1/n) Σ_j L_ij²)`, worst node.
fn rms_component_bound(l_ij: &[Vec<f64>]) -> f64 {
    l_ij.iter()
        .map(|row| (row.iter().map(|v| v * v).sum::<f64>() / row.len() as f64).sqrt())
        .fold(0.0, f64::max)
}

/// Logistic regression with l2 regularization.
///
/// `Lhat` uses co-coercivity of convex components, `(1/n) Σ ‖Δ∇f_ij‖² ≤ max_j L_ij · L ‖Δx‖²`,
/// or the mean-square component bound, whichever is smaller.
pub fn logistic_objective(
    shards: Vec<DatasetShard>,
    lambda: f64,
) -> Result<RowObjective<LogisticLoss>> {
    let mut obj = RowObjective::assemble(LogisticLoss, shards, lambda)?;
    let (l_ij, l_i) = obj.curvature_constants();
    let rms = rms_component_bound(&l_ij);
    let widest = l_ij.iter().flatten().copied().fold(0.0, f64::max);
    obj.smoothness = finish_constants(l_ij, &l_i, lambda, |l| rms.min((widest * l).sqrt()))?;
    Ok(obj)
}

/// Sigmoid least squares `(y − σ(⟨a, w⟩))²`, nonconvex.
///
/// `Lhat` is `safety ×` the largest observed ratio
/// `sqrt((1/n) Σ_j ‖∇f_ij(x) − ∇f_ij(y)‖²) / ‖x − y‖` over random pairs in a
/// ball, capped by the mean-square component bound.
pub fn nlls_objective(
    shards: Vec<DatasetShard>,
    opts: NllsOptions,
) -> Result<RowObjective<SigmoidSquaresLoss>> {
    if opts.pairs == 0
        || opts.radius.is_nan()
        || opts.radius <= 0.0
        || opts.safety.is_nan()
        || opts.safety < 1.0
    {
        return Err(Error::InvalidParameter(format!(
            "NLLS estimate needs pairs > 0, radius > 0, safety >= 1: {opts:?}"
        )));
    }
    let mut obj = RowObjective::assemble(SigmoidSquaresLoss, shards, opts.lambda)?;
    let (l_ij, l_i) = obj.curvature_constants();
    let rms = rms_component_bound(&l_ij);
    let observed = obj.observed_average_smoothness(opts);
    obj.smoothness = finish_constants(l_ij, &l_i, 0.0, |_| (opts.safety * observed).min(rms))?;
    Ok(obj)
}

impl<L: RowLoss> RowObjective<L> {
    /// Largest sampled average-smoothness ratio; pair `k` is evaluated on node `k mod m`.
    pub fn observed_average_smoothness(&self, opts: NllsOptions) -> f64 {
        let d = self.dim;
        let n = self.components;
        let m = self.shards.len();
        let mut ga = vec![0.0; d];
        let mut gb = vec![0.0; d];
        let mut worst: f64 = 0.0;
        for k in 0..opts.pairs {
            let mut r = rng::substream(opts.seed, &[rng::tag::ESTIMATE, k as u64]);
            let x = ball_point(&mut r, d, opts.radius);
            let y = ball_point(&mut r, d, opts.radius);
            let gap = dist_sq(&x, &y);
            if gap == 0.0 {
                continue;
            }
            let i = k % m;
            let mut acc = 0.0;
            for j in 0..n {
                self.component_gradient(i, j, &x, &mut ga);
                self.component_gradient(i, j, &y, &mut gb);
                acc += dist_sq(&ga, &gb);
            }
            worst = worst.max((acc / n as f64 / gap).sqrt());
        }
        worst
    }
}

fn ball_point<R: Rng>(r: &mut R, d: usize, radius: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|_| gaussian(r)).collect();
    let norm = norm_sq(&v).sqrt().max(1e-300);
    let scale = radius * r.gen::<f64>().powf(1.0 / d as f64) / norm;
    v.iter_mut().for_each(|x| *x *= scale);
    v
}

impl<L: RowLoss> FiniteSumObjective for RowObjective<L> {
    fn nodes(&self) -> usize {
        self.shards.len()
    }

    fn components(&self) -> usize {
        self.components
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn component_value(&self, node: usize, component: usize, x: &[f64]) -> f64 {
        let s = &self.shards[node];
        let block = s.block(component);
        let data: f64 = block
            .iter()
            .map(|&r| self.loss.value(dot(s.row(r), x), s.label(r)))
            .sum();
        data / block.len() as f64 + 0.5 * self.lambda * norm_sq(x)
    }

    fn component_gradient(&self, node: usize, component: usize, x: &[f64], out: &mut [f64]) {
        let s = &self.shards[node];
        let block = s.block(component);
        let inv = 1.0 / block.len() as f64;
        for (o, xi) in out.iter_mut().zip(x) {
            *o = self.lambda * xi;
        }
        for &r in block {
            let a = s.row(r);
            let g = self.loss.derivative(dot(a, x), s.label(r));
            axpy(g * inv, a, out);
        }
    }

    fn smoothness(&self) -> &SmoothnessInfo {
        &self.smoothness
    }
}
