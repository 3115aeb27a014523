use nalgebra::DMatrix;

use super::graph::WeightedGraph;
use super::node_vector::NodeVector;
use crate::error::{Error, Result};

/// Eigenvalues below this fraction of λ_max are treated as the kernel.
pub const ZERO_EIGEN_RELATIVE: f64 = 1e-8;

/// Dense symmetric gossip matrix `W = L / λ_max(L)`.
///
/// The kernel contains the consensus vector and the range lies in the
/// zero-sum subspace. On zero-mean vectors the spectrum of `W` is
/// `[1/chi, 1]`, hence `‖Wx − x‖ ≤ (1 − 1/chi)‖x‖` there.
#[derive(Debug, Clone, PartialEq)]
pub struct GossipMatrix {
    size: usize,
    entries: Vec<f64>,
    chi: f64,
    laplacian_max: f64,
    laplacian_min_positive: f64,
}

/// Spectrum of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(size: usize, entries: &[f64]) -> Vec<f64> {
    let mat = DMatrix::from_row_slice(size, size, entries);
    let mut values: Vec<f64> = mat.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

/// `L(g) / λ_max(L(g))` together with the graph condition number.
pub fn gossip_from_laplacian(graph: &WeightedGraph) -> Result<GossipMatrix> {
    let m = graph.node_count();
    if m < 2 {
        return Err(Error::InvalidGraph(format!(
            "gossip matrix needs at least 2 nodes, got {m}"
        )));
    }
    let components = graph.component_count();
    if components != 1 {
        return Err(Error::Disconnected {
            nodes: m,
            components,
        });
    }
    let laplacian = graph.laplacian();
    let spectrum = symmetric_eigenvalues(m, &laplacian);
    let lambda_max = *spectrum.last().expect("m >= 2");
    let lambda_min_positive = spectrum
        .iter()
        .copied()
        .find(|&v| v > ZERO_EIGEN_RELATIVE * lambda_max)
        .ok_or(Error::Disconnected {
            nodes: m,
            components: m,
        })?;
    let inv = 1.0 / lambda_max;
    let mut entries: Vec<f64> = laplacian.iter().map(|v| v * inv).collect();
    // exact symmetry and zero row sums after scaling
    for i in 0..m {
        for j in i + 1..m {
            let avg = 0.5 * (entries[i * m + j] + entries[j * m + i]);
            entries[i * m + j] = avg;
            entries[j * m + i] = avg;
        }
        let off: f64 = (0..m).filter(|&j| j != i).map(|j| entries[i * m + j]).sum();
        entries[i * m + i] = -off;
    }
    Ok(GossipMatrix {
        size: m,
        entries,
        chi: lambda_max / lambda_min_positive,
        laplacian_max: lambda_max,
        laplacian_min_positive: lambda_min_positive,
    })
}

impl GossipMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    /// Row-major dense entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    /// Condition number λ_max / λ⁺_min of the underlying Laplacian.
    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn laplacian_lambda_max(&self) -> f64 {
        self.laplacian_max
    }

    pub fn laplacian_lambda_min_positive(&self) -> f64 {
        self.laplacian_min_positive
    }

    /// Smallest nonzero eigenvalue of `W` itself (`1/chi`).
    pub fn lambda_min_positive(&self) -> f64 {
        self.laplacian_min_positive / self.laplacian_max
    }

    /// Eigenvalues of `W`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        symmetric_eigenvalues(self.size, &self.entries)
    }

    fn check(&self, x: &NodeVector) -> Result<()> {
        if x.nodes() != self.size {
            return Err(Error::DimensionMismatch(format!(
                "gossip matrix is {0}x{0}, node vector has {1} blocks",
                self.size,
                x.nodes()
            )));
        }
        Ok(())
    }

    /// `(W ⊗ I_d) x`.
    pub fn apply(&self, x: &NodeVector) -> Result<NodeVector> {
        self.check(x)?;
        let mut out = NodeVector::zeros(x.nodes(), x.dim());
        self.apply_into(x, &mut out);
        Ok(out)
    }

    /// `((I − W) ⊗ I_d) x`, the averaging step used by the tracking methods.
    pub fn apply_complement(&self, x: &NodeVector) -> Result<NodeVector> {
        let mut wx = self.apply(x)?;
        for (o, v) in wx.as_mut_slice().iter_mut().zip(x.as_slice()) {
            *o = v - *o;
        }
        Ok(wx)
    }

    pub(crate) fn apply_into(&self, x: &NodeVector, out: &mut NodeVector) {
        let m = self.size;
        let d = x.dim();
        let src = x.as_slice();
        let dst = out.as_mut_slice();
        dst.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            let row = &self.entries[i * m..(i + 1) * m];
            let out_block = &mut dst[i * d..(i + 1) * d];
            for (j, &w) in row.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let in_block = &src[j * d..(j + 1) * d];
                for (o, v) in out_block.iter_mut().zip(in_block) {
                    *o += w * v;
                }
            }
        }
    }
}

/// Free-function form of [`GossipMatrix::apply`].
pub fn apply_mixing(w: &GossipMatrix, x: &NodeVector) -> Result<NodeVector> {
    w.apply(x)
}
