use crate::error::{Error, Result};

/// Rows owned by one node, grouped into `n` component blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetShard {
    node: usize,
    dim: usize,
    /// Row-major features, `rows x dim`.
    features: Vec<f64>,
    labels: Vec<f64>,
    /// Row indices of each component block.
    blocks: Vec<Vec<usize>>,
}

impl DatasetShard {
    /// Assigns rows round-robin to `components` blocks.
    pub fn round_robin(
        node: usize,
        rows: Vec<Vec<f64>>,
        labels: Vec<f64>,
        components: usize,
    ) -> Result<Self> {
        if components == 0 {
            return Err(Error::InvalidParameter(
                "need at least one component".into(),
            ));
        }
        let mut blocks = vec![Vec::new(); components];
        for r in 0..rows.len() {
            blocks[r % components].push(r);
        }
        Self::with_blocks(node, rows, labels, blocks)
    }

    /// Uses an explicit block assignment; every row must appear exactly once.
    pub fn with_blocks(
        node: usize,
        rows: Vec<Vec<f64>>,
        labels: Vec<f64>,
        blocks: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidData(format!(
                "node {node}: {} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let dim = rows.first().map_or(0, Vec::len);
        if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != dim) {
            return Err(Error::InvalidData(format!(
                "node {node}: row {r} has dimension {}, expected {dim}",
                row.len()
            )));
        }
        let mut seen = vec![false; rows.len()];
        for (j, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidData(format!(
                    "node {node}: component {j} is empty"
                )));
            }
            for &r in block {
                if r >= rows.len() || seen[r] {
                    return Err(Error::InvalidData(format!(
                        "node {node}: row {r} missing or assigned twice"
                    )));
                }
                seen[r] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidData(format!(
                "node {node}: some rows belong to no component"
            )));
        }
        if rows.iter().flatten().chain(&labels).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("node {node}: non-finite entry")));
        }
        Ok(Self {
            node,
            dim,
            features: rows.into_iter().flatten().collect(),
            labels,
            blocks,
        })
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row_count(&self) -> usize {
        self.labels.len()
    }

    pub fn components(&self) -> usize {
        self.blocks.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.features[r * self.dim..(r + 1) * self.dim]
    }

    pub fn label(&self, r: usize) -> f64 {
        self.labels[r]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn block(&self, j: usize) -> &[usize] {
        &self.blocks[j]
    }

    /// Applies `f` to every label (e.g. mapping ±1 to {0, 1}).
    pub fn map_labels(mut self, f: impl Fn(f64) -> f64) -> Self {
        self.labels.iter_mut().for_each(|y| *y = f(*y));
        self
    }
}
