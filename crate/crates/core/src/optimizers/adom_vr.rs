use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::Serialize;

use super::{check_objective, guard, Optimizer};
use crate::error::{Error, Result};
use crate::network::mixing::multi_stage_mix;
use crate::network::node_vector::axpy;
use crate::network::{GraphSequence, NodeVector};
use crate::objectives::FiniteSumObjective;
use crate::rng::{self, tag};

/// Step parameters of ADOM+VR derived from the problem constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdomVrParams {
    pub tau0: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub eta: f64,
    pub alpha: f64,
    pub nu: f64,
    pub beta: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub theta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub zeta: f64,
    pub lambda: f64,
    pub p1: f64,
    pub p2: f64,
    pub b: usize,
    pub chi: f64,
    pub mu: f64,
    pub l: f64,
    pub lbar: f64,
    pub n: usize,
}

const PARAM_SLACK: f64 = 1e-12;

pub fn adom_vr_params(
    mu: f64,
    l: f64,
    lbar: f64,
    chi: f64,
    n: usize,
    b: usize,
) -> Result<AdomVrParams> {
    let bad = |msg: String| Err(Error::InvalidParameter(msg));
    if !(mu > 0.0 && mu <= l * (1.0 + PARAM_SLACK) && l.is_finite()) {
        return bad(format!("need 0 < mu <= L, got mu={mu}, L={l}"));
    }
    if n == 0 || b == 0 {
        return bad(format!("need n >= 1 and b >= 1, got n={n}, b={b}"));
    }
    if !(lbar >= l * (1.0 - PARAM_SLACK) && lbar <= n as f64 * l * (1.0 + PARAM_SLACK)) {
        return bad(format!(
            "need L <= Lbar <= nL, got L={l}, Lbar={lbar}, n={n}"
        ));
    }
    if !(chi >= 1.0 && chi.is_finite()) {
        return bad(format!("need chi >= 1, got {chi}"));
    }
    let ratio = lbar / l;
    if (b as f64) < ratio * (1.0 - PARAM_SLACK) {
        return Err(Error::BatchBelowSmoothnessRatio { b, ratio });
    }
    let (nf, bf) = (n as f64, b as f64);
    let tau2 = (0.5_f64).min((1.0_f64).max(nf.sqrt() / bf) * (mu / l).sqrt());
    let tau0 = lbar / (2.0 * l * bf);
    let tau1 = (1.0 - tau0) / (1.0 / tau2 + 0.5);
    let eta = 1.0 / (l * (tau2 + 2.0 * tau1 / (1.0 - tau1)));
    let nu = mu / 2.0;
    let sigma2 = mu.sqrt() / (16.0 * chi * l.sqrt());
    let sigma1 = 1.0 / (1.0 / sigma2 + 0.5);
    let lambda = nf / bf * (0.5 + lbar / (l * bf * tau1));
    let p1 = 1.0 / (2.0 * lambda);
    let p2 = lbar / (lambda * l * bf * tau1);
    let params = AdomVrParams {
        tau0,
        tau1,
        tau2,
        eta,
        alpha: nu,
        nu,
        beta: 1.0 / (2.0 * l),
        sigma1,
        sigma2,
        theta: nu / (4.0 * sigma2),
        gamma: nu / (14.0 * sigma2 * chi * chi),
        delta: 1.0 / (17.0 * l),
        zeta: 0.5,
        lambda,
        p1,
        p2,
        b,
        chi,
        mu,
        l,
        lbar,
        n,
    };
    if p1 + p2 > 1.0 + PARAM_SLACK {
        return bad(format!(
            "snapshot probabilities sum to {} > 1; constants are inconsistent",
            p1 + p2
        ));
    }
    if tau0 + tau1 > 1.0 + PARAM_SLACK {
        return bad(format!("tau0 + tau1 = {} exceeds 1", tau0 + tau1));
    }
    Ok(params)
}

/// When a node's fresh `∇F_i(ω_i)` is paid for after its snapshot moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotReset {
    /// At the reset itself.
    #[default]
    Eager,
    /// At the next step that reads it.
    Lazy,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdomVrOptions {
    pub reset: SnapshotReset,
    /// Graphs consumed per iteration; above 1 the gossip operator is `W(k; T)`.
    pub stages: usize,
}

/// ADOM+VR buffers plus the per-node snapshot gradient table.
#[derive(Debug, Clone)]
pub struct AdomVrState {
    pub x: NodeVector,
    pub x_f: NodeVector,
    pub omega: NodeVector,
    pub y: NodeVector,
    pub y_f: NodeVector,
    pub z: NodeVector,
    pub z_f: NodeVector,
    pub momentum: NodeVector,
    pub step: u64,
    pub communications: u64,
    pub oracle_calls: Vec<u64>,
    pub resets: Vec<u64>,
    /// `∇f_ij(ω_i)`, laid out `[i][j][..d]`.
    snapshot_components: Vec<f64>,
    snapshot_full: NodeVector,
    stale: Vec<bool>,
    probabilities: Vec<Vec<f64>>,
    samplers: Vec<WeightedIndex<f64>>,
    reset: SnapshotReset,
}

/// `p_ij = L_ij / (n Lbar_i)`, uniform when every `L_ij` of the node is 0.
fn importance_probabilities(obj: &dyn FiniteSumObjective) -> Vec<Vec<f64>> {
    let s = obj.smoothness();
    let n = obj.components();
    (0..obj.nodes())
        .map(|i| {
            let total: f64 = s.l_ij[i].iter().sum();
            if total > 0.0 {
                s.l_ij[i].iter().map(|v| v / total).collect()
            } else {
                vec![1.0 / n as f64; n]
            }
        })
        .collect()
}

impl AdomVrState {
    /// `x⁰ = ω⁰ = x_f⁰` replicated from `x0`; every other buffer starts at zero.
    /// Charges `n` calls per node for the initial snapshot gradients.
    pub fn new(obj: &dyn FiniteSumObjective, x0: &[f64], reset: SnapshotReset) -> Result<Self> {
        let (m, n, d) = (obj.nodes(), obj.components(), obj.dim());
        if x0.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "initial point has length {}, objective dim {d}",
                x0.len()
            )));
        }
        let x = NodeVector::replicate(m, x0);
        let zeros = NodeVector::zeros(m, d);
        let probabilities = importance_probabilities(obj);
        let samplers = probabilities
            .iter()
            .map(|p| WeightedIndex::new(p.iter().copied()))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidParameter(format!("sampling weights: {e}")))?;
        let mut state = Self {
            x_f: x.clone(),
            omega: x.clone(),
            x,
            y: zeros.clone(),
            y_f: zeros.clone(),
            z: zeros.clone(),
            z_f: zeros.clone(),
            momentum: zeros.clone(),
            step: 0,
            communications: 0,
            oracle_calls: vec![0; m],
            resets: vec![0; m],
            snapshot_components: vec![0.0; m * n * d],
            snapshot_full: zeros,
            stale: vec![false; m],
            probabilities,
            samplers,
            reset,
        };
        for i in 0..m {
            state.refresh_snapshot(obj, i);
        }
        Ok(state)
    }

    /// Recomputes `∇f_ij(ω_i)` for all `j` (`n` calls).
    pub fn refresh_snapshot(&mut self, obj: &dyn FiniteSumObjective, node: usize) {
        let (n, d) = (obj.components(), obj.dim());
        let base = node * n * d;
        let point = self.omega.block(node).to_vec();
        let full = self.snapshot_full.block_mut(node);
        full.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            let slot = &mut self.snapshot_components[base + j * d..base + (j + 1) * d];
            obj.component_gradient(node, j, &point, slot);
            axpy(1.0 / n as f64, slot, full);
        }
        self.oracle_calls[node] += n as u64;
        self.stale[node] = false;
    }

    pub fn probabilities(&self, node: usize) -> &[f64] {
        &self.probabilities[node]
    }

    /// Cached `∇f_ij(ω_i)` for all `j` of one node, `n·d` entries.
    pub fn snapshot_components(&self, node: usize, n: usize) -> &[f64] {
        let d = self.x.dim();
        &self.snapshot_components[node * n * d..(node + 1) * n * d]
    }

    /// Cached `∇F_i(ω_i)`.
    pub fn snapshot_gradient(&self, node: usize) -> &[f64] {
        self.snapshot_full.block(node)
    }
}

/// `(1/b) Σ_{j∈S} (1/(n p_ij)) [∇f_ij(x_g) − ∇f_ij(ω)] + ∇F_i(ω)`, with the
/// snapshot terms read from `snapshot_components` (`n·d` entries).
pub fn adom_vr_estimator(
    obj: &dyn FiniteSumObjective,
    node: usize,
    batch: &[usize],
    probabilities: &[f64],
    x_g: &[f64],
    snapshot_components: &[f64],
    snapshot_gradient: &[f64],
) -> Vec<f64> {
    let n = obj.components();
    let d = obj.dim();
    let mut out = snapshot_gradient.to_vec();
    let mut buf = vec![0.0; d];
    let b = batch.len() as f64;
    for &j in batch {
        obj.component_gradient(node, j, x_g, &mut buf);
        let w = 1.0 / (b * n as f64 * probabilities[j]);
        axpy(w, &buf, &mut out);
        axpy(-w, &snapshot_components[j * d..(j + 1) * d], &mut out);
    }
    out
}

/// One ADOM+VR iteration. `gossip` applies `(W(k) ⊗ I_d)` for this
/// step and `rounds` is the number of communications it costs.
pub fn adom_vr_step(
    state: &mut AdomVrState,
    params: &AdomVrParams,
    obj: &dyn FiniteSumObjective,
    gossip: &dyn Fn(&NodeVector) -> Result<NodeVector>,
    rounds: u64,
    seed: u64,
) -> Result<()> {
    let p = params;
    let k = state.step;
    let (m, n) = (obj.nodes(), obj.components());

    let mut x_g = NodeVector::lincomb(p.tau1, &state.x, p.tau0, &state.omega);
    x_g.axpy(1.0 - p.tau1 - p.tau0, &state.x_f);

    let mut grad = NodeVector::zeros(m, obj.dim());
    for i in 0..m {
        if state.stale[i] {
            state.refresh_snapshot(obj, i);
        }
        let mut r = rng::substream(seed, &[tag::BATCH, k, i as u64]);
        let batch: Vec<usize> = (0..p.b).map(|_| state.samplers[i].sample(&mut r)).collect();
        let g = adom_vr_estimator(
            obj,
            i,
            &batch,
            &state.probabilities[i],
            x_g.block(i),
            state.snapshot_components(i, n),
            state.snapshot_gradient(i),
        );
        grad.block_mut(i).copy_from_slice(&g);
        state.oracle_calls[i] += p.b as u64;
    }

    let y_g = NodeVector::lincomb(p.sigma1, &state.y, 1.0 - p.sigma1, &state.y_f);
    let z_g = NodeVector::lincomb(p.sigma1, &state.z, 1.0 - p.sigma1, &state.z_f);

    // implicit x/y pair:
    // (1+ηα) x⁺ − η y⁺ = r_x,  θ x⁺ + (1+θβ) y⁺ = r_y
    let det = (1.0 + p.eta * p.alpha) * (1.0 + p.theta * p.beta) + p.eta * p.theta;
    let mut x_new = NodeVector::zeros(m, obj.dim());
    let mut y_new = NodeVector::zeros(m, obj.dim());
    {
        let xs = state.x.as_slice();
        let ys = state.y.as_slice();
        let xg = x_g.as_slice();
        let gs = grad.as_slice();
        let yg = y_g.as_slice();
        let zg = z_g.as_slice();
        let xo = x_new.as_mut_slice();
        let yo = y_new.as_mut_slice();
        for c in 0..xs.len() {
            let resid = gs[c] - p.nu * xg[c];
            let r_x = xs[c] + p.eta * p.alpha * xg[c] - p.eta * resid;
            let r_y = ys[c] + p.theta * p.beta * resid - p.theta / p.nu * (yg[c] + zg[c]);
            xo[c] = ((1.0 + p.theta * p.beta) * r_x + p.eta * r_y) / det;
            yo[c] = ((1.0 + p.eta * p.alpha) * r_y - p.theta * r_x) / det;
        }
    }

    let mut x_f_new = x_g.clone();
    x_f_new.axpy(p.tau2, &x_new);
    x_f_new.axpy(-p.tau2, &state.x);

    for i in 0..m {
        let u: f64 = rng::substream(seed, &[tag::SNAPSHOT, k, i as u64]).gen();
        let source = if u < p.p1 {
            Some(state.x_f.block(i))
        } else if u < p.p1 + p.p2 {
            Some(x_g.block(i))
        } else {
            None
        };
        if let Some(src) = source {
            let src = src.to_vec();
            state.omega.block_mut(i).copy_from_slice(&src);
            state.resets[i] += 1;
            match state.reset {
                SnapshotReset::Eager => state.refresh_snapshot(obj, i),
                SnapshotReset::Lazy => state.stale[i] = true,
            }
        }
    }

    let mut y_f_new = y_g.clone();
    y_f_new.axpy(p.sigma2, &y_new);
    y_f_new.axpy(-p.sigma2, &state.y);

    let mut yz = y_g.clone();
    yz.axpy(1.0, &z_g);
    let mut u = state.momentum.clone();
    u.axpy(p.gamma / p.nu, &yz);
    let wu = gossip(&u)?;
    let mut z_new = state.z.clone();
    z_new.axpy(p.gamma * p.delta, &z_g);
    z_new.axpy(-p.gamma * p.delta, &state.z);
    z_new.axpy(-1.0, &wu);
    let momentum_new = u.sub(&wu);
    let mut z_f_new = z_g;
    z_f_new.axpy(-p.zeta, &gossip(&yz)?);

    state.x = x_new;
    state.x_f = x_f_new;
    state.y = y_new;
    state.y_f = y_f_new;
    state.z = z_new;
    state.z_f = z_f_new;
    state.momentum = momentum_new;
    state.step += 1;
    state.communications += rounds;
    guard(
        state.step,
        &[
            ("x", &state.x),
            ("x_f", &state.x_f),
            ("omega", &state.omega),
            ("y", &state.y),
            ("y_f", &state.y_f),
            ("z", &state.z),
            ("z_f", &state.z_f),
            ("momentum", &state.momentum),
        ],
    )
}

/// ADOM+VR bound to a seed and a gossip schedule.
#[derive(Debug, Clone)]
pub struct AdomVr {
    pub params: AdomVrParams,
    pub state: AdomVrState,
    stages: usize,
    seed: u64,
}

impl AdomVr {
    pub fn new(
        params: AdomVrParams,
        obj: &dyn FiniteSumObjective,
        x0: &[f64],
        options: AdomVrOptions,
        seed: u64,
    ) -> Result<Self> {
        if params.n != obj.components() {
            return Err(Error::InvalidParameter(format!(
                "parameters are for n = {}, objective has {}",
                params.n,
                obj.components()
            )));
        }
        Ok(Self {
            params,
            state: AdomVrState::new(obj, x0, options.reset)?,
            stages: options.stages.max(1),
            seed,
        })
    }
}

impl Optimizer for AdomVr {
    fn name(&self) -> &'static str {
        "adom_vr"
    }

    fn step(&mut self, obj: &dyn FiniteSumObjective, seq: &GraphSequence) -> Result<()> {
        check_objective(obj, seq)?;
        let t = self.stages;
        let start = self.state.step * t as u64;
        let gossip = |v: &NodeVector| -> Result<NodeVector> {
            if t == 1 {
                seq.gossip(start).apply(v)
            } else {
                multi_stage_mix(seq, start, t, v)
            }
        };
        adom_vr_step(
            &mut self.state,
            &self.params,
            obj,
            &gossip,
            t as u64,
            self.seed,
        )
    }

    fn iterate(&self) -> &NodeVector {
        &self.state.x
    }

    fn iteration(&self) -> u64 {
        self.state.step
    }

    fn communications(&self) -> u64 {
        self.state.communications
    }

    fn oracle_calls(&self) -> u64 {
        self.state.oracle_calls.iter().copied().max().unwrap_or(0)
    }

    fn parameters(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self.params).expect("plain struct");
        v["stages"] = self.stages.into();
        v["reset"] = serde_json::to_value(self.state.reset).expect("enum");
        v
    }
}
