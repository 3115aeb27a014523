use std::collections::VecDeque;
use std::fmt;

use rand::Rng;

use super::gossip::{gossip_from_laplacian, GossipMatrix};
use super::graph::WeightedGraph;
use crate::error::{Error, Result};
use crate::rng::{self, tag};

/// Resamples per step before a random geometric graph is declared unreachable.
pub const CONNECTIVITY_RETRIES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Static,
    RandomGeometric,
    TwoStarHop,
    RotatingStar,
    /// Graphs loaded from a dump file.
    Replay,
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TopologyKind::Static => "static",
            TopologyKind::RandomGeometric => "random_geometric",
            TopologyKind::TwoStarHop => "two_star_hop",
            TopologyKind::RotatingStar => "rotating_star",
            TopologyKind::Replay => "replay",
        };
        f.write_str(s)
    }
}

/// Node partition used by the rotating-star construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarPartition {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    pub s3: Vec<usize>,
}

/// Periodic sequence of connected graphs with precomputed gossip matrices.
///
/// Step `k` uses graph `k mod period`.
#[derive(Debug, Clone)]
pub struct GraphSequence {
    kind: TopologyKind,
    node_count: usize,
    seed: Option<u64>,
    graphs: Vec<WeightedGraph>,
    gossip: Vec<GossipMatrix>,
    partition: Option<StarPartition>,
}

impl GraphSequence {
    fn build(
        kind: TopologyKind,
        graphs: Vec<WeightedGraph>,
        seed: Option<u64>,
        partition: Option<StarPartition>,
    ) -> Result<Self> {
        let node_count = graphs
            .first()
            .map(WeightedGraph::node_count)
            .ok_or_else(|| Error::InvalidGraph("empty graph sequence".into()))?;
        if let Some(g) = graphs.iter().find(|g| g.node_count() != node_count) {
            return Err(Error::InvalidGraph(format!(
                "mixed node counts {node_count} and {}",
                g.node_count()
            )));
        }
        let gossip = graphs
            .iter()
            .map(gossip_from_laplacian)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind,
            node_count,
            seed,
            graphs,
            gossip,
            partition,
        })
    }

    /// The same graph at every step.
    pub fn fixed(graph: WeightedGraph) -> Result<Self> {
        Self::build(TopologyKind::Static, vec![graph], None, None)
    }

    /// Replays an explicit list of graphs cyclically.
    pub fn from_graphs(graphs: Vec<WeightedGraph>) -> Result<Self> {
        Self::build(TopologyKind::Replay, graphs, None, None)
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn is_static(&self) -> bool {
        self.kind == TopologyKind::Static
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn period(&self) -> usize {
        self.graphs.len()
    }

    pub fn graph(&self, step: u64) -> &WeightedGraph {
        &self.graphs[(step % self.graphs.len() as u64) as usize]
    }

    pub fn gossip(&self, step: u64) -> &GossipMatrix {
        &self.gossip[(step % self.gossip.len() as u64) as usize]
    }

    pub fn graphs(&self) -> &[WeightedGraph] {
        &self.graphs
    }

    pub fn gossip_matrices(&self) -> &[GossipMatrix] {
        &self.gossip
    }

    /// S₁/S₂/S₃ for rotating-star sequences.
    pub fn partition(&self) -> Option<&StarPartition> {
        self.partition.as_ref()
    }

    /// Largest single-graph condition number over one period.
    pub fn max_graph_chi(&self) -> f64 {
        self.gossip
            .iter()
            .map(GossipMatrix::chi)
            .fold(1.0, f64::max)
    }
}

/// Random geometric graphs in the unit square, resampled every step.
///
/// Step `k` draws from its own substream of `seed`, so the sequence does not
/// depend on `horizon` beyond its length.
pub fn random_geometric_sequence(
    m: usize,
    radius: f64,
    seed: u64,
    horizon: usize,
) -> Result<GraphSequence> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "random geometric graph needs m >= 2, got {m}"
        )));
    }
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let graphs = (0..horizon as u64)
        .map(|step| sample_geometric(m, radius, seed, step))
        .collect::<Result<Vec<_>>>()?;
    GraphSequence::build(TopologyKind::RandomGeometric, graphs, Some(seed), None)
}

fn sample_geometric(m: usize, radius: f64, seed: u64, step: u64) -> Result<WeightedGraph> {
    let mut rng = rng::substream(seed, &[tag::GRAPH, step]);
    let r2 = radius * radius;
    for _ in 0..CONNECTIVITY_RETRIES {
        let pts: Vec<(f64, f64)> = (0..m).map(|_| (rng.gen(), rng.gen())).collect();
        let mut g = WeightedGraph::new(m)?;
        for i in 0..m {
            for j in i + 1..m {
                let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
                if dx * dx + dy * dy <= r2 {
                    g.add_edge(i, j, 1.0)?;
                }
            }
        }
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::ConnectivityRetriesExhausted {
        nodes: m,
        radius,
        retries: CONNECTIVITY_RETRIES,
    })
}

/// Left star center in the two-star topology.
pub const TWO_STAR_LEFT: usize = 0;
/// Right star center in the two-star topology.
pub const TWO_STAR_RIGHT: usize = 1;

#[derive(Debug, Clone)]
struct TwoStarState {
    middle: usize,
    left: Vec<usize>,
    right: VecDeque<usize>,
}

impl TwoStarState {
    fn graph(&self, m: usize) -> Result<WeightedGraph> {
        let mut g = WeightedGraph::new(m)?;
        for &v in &self.left {
            g.add_edge(TWO_STAR_LEFT, v, 1.0)?;
        }
        for &v in &self.right {
            g.add_edge(TWO_STAR_RIGHT, v, 1.0)?;
        }
        g.add_edge(TWO_STAR_LEFT, self.middle, 1.0)?;
        g.add_edge(TWO_STAR_RIGHT, self.middle, 1.0)?;
        Ok(g)
    }

    // leaf v of the right star becomes the middle vertex; the old middle joins the left star
    fn hop_left(&mut self) {
        let v = self.right.pop_front().expect("right star has a leaf");
        self.left.push(self.middle);
        self.middle = v;
    }

    fn hop_right(&mut self) {
        let v = self.left.pop().expect("left star has a leaf");
        self.right.push_front(self.middle);
        self.middle = v;
    }
}

/// Cyclic two-star sequence `T_{0,m-3} → … → T_{m-3,0} → … → T_{0,m-3}`.
///
/// Node 0 is the left center, node 1 the right center, node 2 the initial
/// middle vertex. Every graph is a tree on `m` nodes and consecutive graphs
/// differ by one removed and one added edge.
pub fn two_star_hop_sequence(m: usize) -> Result<GraphSequence> {
    if m < 4 {
        return Err(Error::InvalidParameter(format!(
            "two-star hop sequence needs m >= 4, got {m}"
        )));
    }
    let mut state = TwoStarState {
        middle: 2,
        left: Vec::new(),
        right: (3..m).collect(),
    };
    let hops = m - 3;
    let mut graphs = Vec::with_capacity(2 * hops);
    for _ in 0..hops {
        graphs.push(state.graph(m)?);
        state.hop_left();
    }
    for _ in 0..hops {
        graphs.push(state.graph(m)?);
        state.hop_right();
    }
    debug_assert_eq!(state.middle, 2);
    GraphSequence::build(TopologyKind::TwoStarHop, graphs, None, None)
}

/// Default partition: S₁ = first ⌈m/3⌉ nodes, S₂ the next ⌈m/3⌉, S₃ the rest.
pub fn default_star_partition(m: usize) -> (Vec<usize>, Vec<usize>) {
    let k = m.div_ceil(3);
    ((0..k).collect(), (k..(2 * k).min(m)).collect())
}

/// Star graphs whose center walks through S₃ and then one S₁ vertex that
/// links S₁ and S₂; the S₁ vertex used rotates from cycle to cycle.
pub fn rotating_star_sequence(m: usize, s1: &[usize], s2: &[usize]) -> Result<GraphSequence> {
    if m < 3 {
        return Err(Error::InvalidParameter(format!(
            "rotating star sequence needs m >= 3, got {m}"
        )));
    }
    let k = m.div_ceil(3);
    if s1.len() != k || s2.len() != k {
        return Err(Error::InvalidParameter(format!(
            "|S1| = {} and |S2| = {} must both equal ceil(m/3) = {k}",
            s1.len(),
            s2.len()
        )));
    }
    let mut seen = vec![false; m];
    for &v in s1.iter().chain(s2) {
        if v >= m {
            return Err(Error::InvalidParameter(format!(
                "node {v} outside [0, {m})"
            )));
        }
        if seen[v] {
            return Err(Error::InvalidParameter(format!(
                "node {v} appears twice in S1 ∪ S2"
            )));
        }
        seen[v] = true;
    }
    let s3: Vec<usize> = (0..m).filter(|&v| !seen[v]).collect();
    let mut graphs = Vec::with_capacity((s3.len() + 1) * s1.len());
    for &bridge in s1 {
        for &center in &s3 {
            graphs.push(WeightedGraph::star(m, center)?);
        }
        graphs.push(WeightedGraph::star(m, bridge)?);
    }
    let partition = StarPartition {
        s1: s1.to_vec(),
        s2: s2.to_vec(),
        s3,
    };
    GraphSequence::build(TopologyKind::RotatingStar, graphs, None, Some(partition))
}
