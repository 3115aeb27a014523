use crate::error::{Error, Result};

/// Stacked per-node iterate: `m` blocks of dimension `d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeVector {
    nodes: usize,
    dim: usize,
    data: Vec<f64>,
}

impl NodeVector {
    pub fn zeros(nodes: usize, dim: usize) -> Self {
        Self {
            nodes,
            dim,
            data: vec![0.0; nodes * dim],
        }
    }

    pub fn from_flat(nodes: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != nodes * dim {
            return Err(Error::DimensionMismatch(format!(
                "flat buffer of length {} cannot hold {nodes} blocks of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { nodes, dim, data })
    }

    pub fn from_blocks(blocks: &[Vec<f64>]) -> Result<Self> {
        let dim = blocks.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(blocks.len() * dim);
        for (i, b) in blocks.iter().enumerate() {
            if b.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "block {i} has dimension {}, expected {dim}",
                    b.len()
                )));
            }
            data.extend_from_slice(b);
        }
        Ok(Self {
            nodes: blocks.len(),
            dim,
            data,
        })
    }

    /// Every block set to `v`.
    pub fn replicate(nodes: usize, v: &[f64]) -> Self {
        let mut data = Vec::with_capacity(nodes * v.len());
        for _ in 0..nodes {
            data.extend_from_slice(v);
        }
        Self {
            nodes,
            dim: v.len(),
            data,
        }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1)).take(self.nodes)
    }

    pub fn same_shape(&self, other: &NodeVector) -> bool {
        self.nodes == other.nodes && self.dim == other.dim
    }

    pub fn check_shape(&self, other: &NodeVector) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.nodes, self.dim, other.nodes, other.dim
            )))
        }
    }

    /// Average of the blocks.
    pub fn mean_block(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for b in self.blocks() {
            for (m, v) in mean.iter_mut().zip(b) {
                *m += v;
            }
        }
        let inv = 1.0 / self.nodes as f64;
        mean.iter_mut().for_each(|m| *m *= inv);
        mean
    }

    /// Projection onto the zero-sum subspace: each block minus the block mean.
    pub fn centered(&self) -> NodeVector {
        let mean = self.mean_block();
        let mut out = self.clone();
        for i in 0..self.nodes {
            for (v, m) in out.block_mut(i).iter_mut().zip(&mean) {
                *v -= m;
            }
        }
        out
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Σᵢ ‖xᵢ − x̄‖².
    pub fn consensus_error(&self) -> f64 {
        self.centered().norm_sq()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|v| *v = value);
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &NodeVector) {
        debug_assert!(self.same_shape(other));
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }

    /// `a * x + b * y`, shapes must agree.
    pub fn lincomb(a: f64, x: &NodeVector, b: f64, y: &NodeVector) -> NodeVector {
        debug_assert!(x.same_shape(y));
        let data = x
            .data
            .iter()
            .zip(&y.data)
            .map(|(u, v)| a * u + b * v)
            .collect();
        NodeVector {
            nodes: x.nodes,
            dim: x.dim,
            data,
        }
    }

    pub fn sub(&self, other: &NodeVector) -> NodeVector {
        Self::lincomb(1.0, self, -1.0, other)
    }

    pub fn dot(&self, other: &NodeVector) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum()
}

pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
