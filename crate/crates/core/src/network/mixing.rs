//! Composite mixing operators: multi-stage consensus, Chebyshev acceleration
//! and the sampled contraction certificate for graph sequences.

use rand::Rng;
use rand_distr::StandardNormal;

use super::gossip::GossipMatrix;
use super::node_vector::NodeVector;
use super::sequence::GraphSequence;
use crate::error::{Error, Result};
use crate::rng::{self, tag};

/// `Π_{q=start}^{start+T-1} ((I − W(q)) ⊗ I_d) x`, applied in step order.
pub fn multi_stage_complement(
    seq: &GraphSequence,
    start_step: u64,
    stages: usize,
    x: &NodeVector,
) -> Result<NodeVector> {
    if stages == 0 {
        return Err(Error::InvalidParameter(
            "multi-stage consensus needs at least one stage".into(),
        ));
    }
    let mut cur = x.clone();
    for q in 0..stages as u64 {
        cur = seq.gossip(start_step + q).apply_complement(&cur)?;
    }
    Ok(cur)
}

/// `(W(k; T) ⊗ I_d) x` with `W(k; T) = I − Π (I − W(q))`.
pub fn multi_stage_mix(
    seq: &GraphSequence,
    start_step: u64,
    stages: usize,
    x: &NodeVector,
) -> Result<NodeVector> {
    let prod = multi_stage_complement(seq, start_step, stages, x)?;
    Ok(x.sub(&prod))
}

/// Residual polynomial `Q(W)` of a Chebyshev mixer: `Q(0) = 1` and
/// `max |Q|` on `[1/chi, 1]` is minimal among polynomials of its degree.
#[derive(Debug, Clone)]
pub struct ChebyshevMixer {
    degree: usize,
    lower: f64,
}

impl ChebyshevMixer {
    /// Builds the mixer for a static sequence; time-varying sequences are rejected.
    pub fn for_sequence(seq: &GraphSequence, degree: usize) -> Result<Self> {
        if !seq.is_static() {
            return Err(Error::NotStatic(seq.kind().to_string()));
        }
        Self::for_matrix(seq.gossip(0), degree)
    }

    pub fn for_matrix(w: &GossipMatrix, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidParameter(
                "Chebyshev degree must be at least 1".into(),
            ));
        }
        Ok(Self {
            degree,
            lower: w.lambda_min_positive(),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Worst-case `|Q(λ)|` over the zero-mean spectrum, `1 / T_K((1+a)/(1−a))`.
    pub fn contraction(&self) -> f64 {
        let a = self.lower;
        if a >= 1.0 - 1e-12 {
            return 0.0;
        }
        let s0 = (1.0 + a) / (1.0 - a);
        1.0 / (self.degree as f64 * s0.acosh()).cosh()
    }

    /// `Q(W) x` via the normalized three-term recurrence.
    pub fn residual(&self, w: &GossipMatrix, x: &NodeVector) -> Result<NodeVector> {
        let a = self.lower;
        if a >= 1.0 - 1e-12 {
            // zero-mean spectrum is the single point 1, so Q(λ) = 1 − λ is exact
            return w.apply_complement(x);
        }
        let s0 = (1.0 + a) / (1.0 - a);
        let shift = |v: &NodeVector| -> Result<NodeVector> {
            let wv = w.apply(v)?;
            Ok(NodeVector::lincomb(
                (1.0 + a) / (1.0 - a),
                v,
                -2.0 / (1.0 - a),
                &wv,
            ))
        };
        // r_k = T_k(S) x / T_k(s0)
        let mut c_prev = 1.0;
        let mut c_cur = s0;
        let mut r_prev = x.clone();
        let mut r_cur = shift(x)?;
        r_cur.scale(1.0 / s0);
        for _ in 1..self.degree {
            let c_next = 2.0 * s0 * c_cur - c_prev;
            let sr = shift(&r_cur)?;
            let next = NodeVector::lincomb(2.0 * c_cur / c_next, &sr, -c_prev / c_next, &r_prev);
            r_prev = std::mem::replace(&mut r_cur, next);
            c_prev = c_cur;
            c_cur = c_next;
        }
        Ok(r_cur)
    }

    /// `P(W) x = x − Q(W) x`; consensus vectors map to zero.
    pub fn apply(&self, w: &GossipMatrix, x: &NodeVector) -> Result<NodeVector> {
        Ok(x.sub(&self.residual(w, x)?))
    }
}

/// Chebyshev-accelerated gossip `P(W) x` on a static sequence.
pub fn chebyshev_mix(seq: &GraphSequence, degree: usize, x: &NodeVector) -> Result<NodeVector> {
    ChebyshevMixer::for_sequence(seq, degree)?.apply(seq.gossip(0), x)
}

const POWER_STEPS: usize = 40;

/// Sampled certificate for the contraction parameter of a sequence.
///
/// For every graph in one period, `trials` random zero-mean vectors are
/// refined by power iteration on `I − W`; every visited vector is a test
/// vector. Returns `1 / (1 − r)` where `r` is the largest observed
/// `‖Wx − x‖ / ‖x‖`, so `‖Wx − x‖ ≤ (1 − 1/χ̂)‖x‖` holds on all samples
/// (and with it the squared form of the contraction).
pub fn measure_chi(seq: &GraphSequence, trials: usize, seed: u64) -> f64 {
    let m = seq.node_count();
    let trials = trials.max(1);
    let mut worst: f64 = 0.0;
    for (g, w) in seq.gossip_matrices().iter().enumerate() {
        for t in 0..trials {
            let mut rng = rng::substream(seed, &[tag::CHI_PROBE, g as u64, t as u64]);
            let data: Vec<f64> = (0..m).map(|_| gaussian(&mut rng)).collect();
            let mut x = NodeVector::from_flat(m, 1, data).expect("shape").centered();
            for _ in 0..POWER_STEPS {
                let norm = x.norm();
                if norm < 1e-300 {
                    break;
                }
                x.scale(1.0 / norm);
                let y = w.apply_complement(&x).expect("shape").centered();
                worst = worst.max(y.norm());
                x = y;
            }
        }
    }
    // guard against rounding pushing the ratio to 1
    let worst = worst.min(1.0 - 1e-15);
    1.0 / (1.0 - worst)
}

/// One standard normal draw.
pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::graph::WeightedGraph;
    use crate::network::sequence::{default_star_partition, rotating_star_sequence};

    fn zero_mean(m: usize, d: usize, seed: u64) -> NodeVector {
        let mut rng = rng::substream(seed, &[0]);
        let data = (0..m * d).map(|_| gaussian(&mut rng)).collect();
        NodeVector::from_flat(m, d, data).unwrap().centered()
    }

    #[test]
    fn single_stage_matches_plain_mixing() {
        let seq = GraphSequence::fixed(WeightedGraph::ring(6).unwrap()).unwrap();
        let x = zero_mean(6, 3, 1);
        let a = multi_stage_mix(&seq, 0, 1, &x).unwrap();
        let b = seq.gossip(0).apply(&x).unwrap();
        for (u, v) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn consensus_maps_to_zero() {
        let (s1, s2) = default_star_partition(7);
        let seq = rotating_star_sequence(7, &s1, &s2).unwrap();
        let x = NodeVector::replicate(7, &[1.0, -4.0]);
        assert!(multi_stage_mix(&seq, 3, 5, &x).unwrap().max_abs() < 1e-13);
        let st = GraphSequence::fixed(WeightedGraph::star(5, 0).unwrap()).unwrap();
        assert!(
            chebyshev_mix(&st, 4, &NodeVector::replicate(5, &[2.0]))
                .unwrap()
                .max_abs()
                < 1e-12
        );
    }

    #[test]
    fn zero_stages_rejected() {
        let seq = GraphSequence::fixed(WeightedGraph::complete(3).unwrap()).unwrap();
        assert!(multi_stage_mix(&seq, 0, 0, &NodeVector::zeros(3, 1)).is_err());
    }

    #[test]
    fn chebyshev_degree_one_is_scaled_gossip() {
        let seq = GraphSequence::fixed(WeightedGraph::star(4, 0).unwrap()).unwrap();
        let x = zero_mean(4, 2, 5);
        let p = chebyshev_mix(&seq, 1, &x).unwrap();
        let a = seq.gossip(0).lambda_min_positive();
        let mut wx = seq.gossip(0).apply(&x).unwrap();
        wx.scale(2.0 / (1.0 + a));
        for (u, v) in p.as_slice().iter().zip(wx.as_slice()) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn chebyshev_rejects_time_varying() {
        let (s1, s2) = default_star_partition(6);
        let seq = rotating_star_sequence(6, &s1, &s2).unwrap();
        assert!(matches!(
            chebyshev_mix(&seq, 2, &NodeVector::zeros(6, 1)),
            Err(Error::NotStatic(_))
        ));
    }

    #[test]
    fn chi_for_small_static_graphs() {
        let two = GraphSequence::fixed(WeightedGraph::complete(2).unwrap()).unwrap();
        assert!((measure_chi(&two, 10, 1) - 1.0).abs() < 1e-9);
        let star = GraphSequence::fixed(WeightedGraph::star(4, 0).unwrap()).unwrap();
        let chi = measure_chi(&star, 20, 2);
        assert!((chi - 4.0).abs() <= 0.05 * 4.0, "{chi}");
        assert!(chi <= 4.0 + 1e-9);
    }

    #[test]
    fn chi_is_deterministic() {
        let seq = crate::network::sequence::random_geometric_sequence(8, 0.6, 3, 10).unwrap();
        assert_eq!(measure_chi(&seq, 5, 11), measure_chi(&seq, 5, 11));
    }
}
