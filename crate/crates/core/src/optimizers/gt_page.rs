use rand::Rng;
use serde::Serialize;

use super::{check_objective, guard, local_gradients, Optimizer};
use crate::error::{Error, Result};
use crate::network::mixing::{multi_stage_complement, ChebyshevMixer};
use crate::network::node_vector::axpy;
use crate::network::{GraphSequence, NodeVector};
use crate::objectives::FiniteSumObjective;
use crate::rng::{self, tag};

/// Constant from the step-size analysis.
const C_TILDE: f64 = 4.0;

/// Contraction of `T = ⌈χ⌉` consensus stages, `1 − e⁻¹`.
pub fn stage_rho() -> f64 {
    1.0 - (-1.0f64).exp()
}

/// How the step size was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Minimum of the three analytic bounds and `ρ/L`.
    Theory,
    /// Set by the caller.
    Manual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GtPageParams {
    pub eta: f64,
    pub p: f64,
    pub b: usize,
    pub stages: usize,
    pub chi: f64,
    pub l: f64,
    pub lhat: f64,
    pub n: usize,
    pub rule: StepRule,
    /// The three analytic bounds and `ρ/L`, kept for the metadata table.
    pub bounds: [f64; 4],
}

impl GtPageParams {
    /// Replaces the step size, keeping everything else. Zero is allowed
    /// and leaves pure consensus.
    pub fn with_step(mut self, eta: f64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step must be nonnegative, got {eta}"
            )));
        }
        self.eta = eta;
        self.rule = StepRule::Manual;
        Ok(self)
    }

    pub fn with_stages(mut self, stages: usize) -> Result<Self> {
        if stages == 0 {
            return Err(Error::InvalidParameter(
                "need at least one consensus stage".into(),
            ));
        }
        self.stages = stages;
        Ok(self)
    }
}

fn step_bounds(l: f64, p: f64, b: usize, lhat: f64) -> [f64; 4] {
    let c = C_TILDE;
    let rho = stage_rho();
    let x = (1.0 - p) * lhat * lhat / (b as f64 * p * l * l);
    let b2 = 2.0 / (l * ((1.0 + 2.0 / c) + (2.0 + 8.0 / (c * c) + 16.0 * x).sqrt()));
    let b3 = (2.0 * rho * rho + 2.0 * c * (rho * rho + rho) * x.sqrt()) / (l * (1.0 + 2.0 * c * x));
    let inner = (288.0 + 2.0 / (c * c) + 288.0 * c * c * x + 2.0 * x / (9.0 * c)).sqrt();
    let b4 = rho.powi(3) / (18.0 * c * l * (12.0 + 1.0 / c + 12.0 * c * x.sqrt() + inner));
    [b2, b3, b4, rho / l]
}

/// `b_opt` and `p_opt` default to `⌈√n·Lhat/L⌉` and `b/(n+b)`.
pub fn gt_page_params(
    l: f64,
    lhat: f64,
    chi: f64,
    n: usize,
    b_opt: Option<usize>,
    p_opt: Option<f64>,
) -> Result<GtPageParams> {
    if n == 0 || !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need n >= 1 and L > 0, got n={n}, L={l}"
        )));
    }
    let nf = n as f64;
    if !(lhat >= l * (1.0 - 1e-9) && lhat <= nf.sqrt() * l * (1.0 + 1e-9)) {
        return Err(Error::InvalidParameter(format!(
            "need L <= Lhat <= sqrt(n) L, got L={l}, Lhat={lhat}, n={n}"
        )));
    }
    if !(chi >= 1.0 && chi.is_finite()) {
        return Err(Error::InvalidParameter(format!("need chi >= 1, got {chi}")));
    }
    let b = match b_opt {
        Some(b) if b > n => {
            return Err(Error::InvalidParameter(format!(
                "batch {b} exceeds n = {n}"
            )))
        }
        Some(0) => return Err(Error::InvalidParameter("batch must be at least 1".into())),
        Some(b) => b,
        None => ((nf.sqrt() * lhat / l - 1e-9).ceil() as usize).clamp(1, n),
    };
    let p = p_opt.unwrap_or(b as f64 / (nf + b as f64));
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "restart probability must be in (0, 1], got {p}"
        )));
    }
    let bounds = step_bounds(l, p, b, lhat);
    let eta = bounds.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GtPageParams {
        eta,
        p,
        b,
        stages: (chi - 1e-9).ceil().max(1.0) as usize,
        chi,
        l,
        lhat,
        n,
        rule: StepRule::Theory,
        bounds,
    })
}

/// Mixing applied to `x` and `v` each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Consensus {
    /// `T` consecutive graphs, `Π (I − W(q))`.
    #[default]
    MultiStage,
    /// Chebyshev polynomial of the given degree in a static `W`.
    Chebyshev { degree: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct GtPageOptions {
    pub consensus: Consensus,
    /// One restart coin per node instead of a single shared one.
    pub per_node_coin: bool,
}

#[derive(Debug, Clone)]
pub struct GtPageState {
    pub x: NodeVector,
    pub y: NodeVector,
    pub v: NodeVector,
    pub step: u64,
    /// Whether node 0 took the full-gradient branch in the last step.
    pub last_full: bool,
    pub full_steps: Vec<u64>,
    pub communications: u64,
    pub oracle_calls: Vec<u64>,
}

impl GtPageState {
    /// `x⁰` replicated, `y⁰ = ∇F(x⁰)` (`n` calls per node), `v⁰ = mean(y⁰)` replicated.
    pub fn new(obj: &dyn FiniteSumObjective, x0: &[f64]) -> Result<Self> {
        if x0.len() != obj.dim() {
            return Err(Error::DimensionMismatch(format!(
                "initial point has length {}, objective dim {}",
                x0.len(),
                obj.dim()
            )));
        }
        let m = obj.nodes();
        let x = NodeVector::replicate(m, x0);
        let y = local_gradients(obj, &x);
        let v = NodeVector::replicate(m, &y.mean_block());
        Ok(Self {
            x,
            y,
            v,
            step: 0,
            last_full: true,
            full_steps: vec![0; m],
            communications: 0,
            oracle_calls: vec![obj.components() as u64; m],
        })
    }
}

/// `y + (1/b) Σ_{j∈S} (∇f_ij(x_new) − ∇f_ij(x_old))`.
pub fn page_estimator(
    obj: &dyn FiniteSumObjective,
    node: usize,
    batch: &[usize],
    x_new: &[f64],
    x_old: &[f64],
    y_old: &[f64],
) -> Vec<f64> {
    let mut out = y_old.to_vec();
    let mut buf = vec![0.0; obj.dim()];
    let w = 1.0 / batch.len() as f64;
    for &j in batch {
        obj.component_gradient(node, j, x_new, &mut buf);
        axpy(w, &buf, &mut out);
        obj.component_gradient(node, j, x_old, &mut buf);
        axpy(-w, &buf, &mut out);
    }
    out
}

fn complement(
    seq: &GraphSequence,
    consensus: &Consensus,
    mixer: Option<&ChebyshevMixer>,
    start: u64,
    stages: usize,
    v: &NodeVector,
) -> Result<NodeVector> {
    match (consensus, mixer) {
        (Consensus::Chebyshev { .. }, Some(mx)) => mx.residual(seq.gossip(0), v),
        _ => multi_stage_complement(seq, start, stages, v),
    }
}

/// One GT-PAGE iteration.
pub fn gt_page_step(
    state: &mut GtPageState,
    params: &GtPageParams,
    obj: &dyn FiniteSumObjective,
    seq: &GraphSequence,
    options: &GtPageOptions,
    seed: u64,
) -> Result<()> {
    check_objective(obj, seq)?;
    let mixer = match options.consensus {
        Consensus::Chebyshev { degree } => Some(ChebyshevMixer::for_sequence(seq, degree)?),
        Consensus::MultiStage => None,
    };
    gt_page_step_with(state, params, obj, seq, options, mixer.as_ref(), seed)
}

fn gt_page_step_with(
    state: &mut GtPageState,
    params: &GtPageParams,
    obj: &dyn FiniteSumObjective,
    seq: &GraphSequence,
    options: &GtPageOptions,
    mixer: Option<&ChebyshevMixer>,
    seed: u64,
) -> Result<()> {
    let k = state.step;
    let (m, n) = (obj.nodes(), obj.components());
    let t = params.stages;
    let start = k * t as u64;
    let rounds = match options.consensus {
        Consensus::MultiStage => t as u64,
        Consensus::Chebyshev { degree } => degree as u64,
    };

    let mut x_new = complement(seq, &options.consensus, mixer, start, t, &state.x)?;
    x_new.axpy(-params.eta, &state.v);

    let shared: f64 = rng::substream(seed, &[tag::RESTART, k]).gen();
    let mut y_new = NodeVector::zeros(m, obj.dim());
    for i in 0..m {
        let coin = if options.per_node_coin {
            rng::substream(seed, &[tag::RESTART, k, i as u64]).gen()
        } else {
            shared
        };
        if coin < params.p {
            obj.local_gradient(i, x_new.block(i), y_new.block_mut(i));
            state.oracle_calls[i] += n as u64;
            state.full_steps[i] += 1;
            if i == 0 {
                state.last_full = true;
            }
        } else {
            let mut r = rng::substream(seed, &[tag::BATCH, k, i as u64]);
            let batch: Vec<usize> = (0..params.b).map(|_| r.gen_range(0..n)).collect();
            let g = page_estimator(
                obj,
                i,
                &batch,
                x_new.block(i),
                state.x.block(i),
                state.y.block(i),
            );
            y_new.block_mut(i).copy_from_slice(&g);
            state.oracle_calls[i] += params.b as u64;
            if i == 0 {
                state.last_full = false;
            }
        }
    }

    let mut v_new = complement(seq, &options.consensus, mixer, start, t, &state.v)?;
    v_new.axpy(1.0, &y_new);
    v_new.axpy(-1.0, &state.y);

    state.x = x_new;
    state.y = y_new;
    state.v = v_new;
    state.step += 1;
    state.communications += rounds;
    guard(
        state.step,
        &[("x", &state.x), ("y", &state.y), ("v", &state.v)],
    )
}

#[derive(Debug, Clone)]
pub struct GtPage {
    pub params: GtPageParams,
    pub state: GtPageState,
    pub options: GtPageOptions,
    mixer: Option<ChebyshevMixer>,
    seed: u64,
}

impl GtPage {
    pub fn new(
        params: GtPageParams,
        obj: &dyn FiniteSumObjective,
        seq: &GraphSequence,
        x0: &[f64],
        options: GtPageOptions,
        seed: u64,
    ) -> Result<Self> {
        check_objective(obj, seq)?;
        if params.n != obj.components() {
            return Err(Error::InvalidParameter(format!(
                "parameters are for n = {}, objective has {}",
                params.n,
                obj.components()
            )));
        }
        let mixer = match options.consensus {
            Consensus::Chebyshev { degree } => Some(ChebyshevMixer::for_sequence(seq, degree)?),
            Consensus::MultiStage => None,
        };
        Ok(Self {
            params,
            state: GtPageState::new(obj, x0)?,
            options,
            mixer,
            seed,
        })
    }
}

impl Optimizer for GtPage {
    fn name(&self) -> &'static str {
        "gt_page"
    }

    fn step(&mut self, obj: &dyn FiniteSumObjective, seq: &GraphSequence) -> Result<()> {
        check_objective(obj, seq)?;
        gt_page_step_with(
            &mut self.state,
            &self.params,
            obj,
            seq,
            &self.options,
            self.mixer.as_ref(),
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
        v["consensus"] = serde_json::to_value(self.options.consensus).expect("enum");
        v["per_node_coin"] = self.options.per_node_coin.into();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_component_restarts_half_the_time() {
        let p = gt_page_params(1.0, 1.0, 1.0, 1, None, None).unwrap();
        assert_eq!(p.b, 1);
        assert_eq!(p.p, 0.5);
    }

    #[test]
    fn equal_smoothness_batch_is_root_n() {
        let p = gt_page_params(2.0, 2.0, 3.5, 4, None, None).unwrap();
        assert_eq!(p.b, 2);
        assert!((p.p - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.stages, 4);
    }

    #[test]
    fn step_respects_every_bound() {
        for &(l, lhat, n) in &[(1.0, 1.0, 1), (1.0, 3.0, 16), (5.0, 5.0, 100)] {
            let p = gt_page_params(l, lhat, 2.0, n, None, None).unwrap();
            assert!(p.eta > 0.0);
            assert!(p.eta <= stage_rho() / l);
            assert!(p.bounds.iter().all(|&b| p.eta <= b));
        }
    }

    #[test]
    fn oversized_batch_rejected() {
        assert!(gt_page_params(1.0, 1.0, 1.0, 4, Some(5), None).is_err());
    }

    #[test]
    fn manual_step_is_recorded() {
        let p = gt_page_params(1.0, 1.0, 1.0, 4, None, None)
            .unwrap()
            .with_step(0.3)
            .unwrap();
        assert_eq!(p.rule, StepRule::Manual);
        assert_eq!(p.eta, 0.3);
    }
}
