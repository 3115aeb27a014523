use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Undirected graph with strictly positive edge weights and no self-loops.
///
/// Edges are keyed by `(min(i, j), max(i, j))`, so iteration order is
/// deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    node_count: usize,
    edges: BTreeMap<(usize, usize), f64>,
}

impl WeightedGraph {
    pub fn new(node_count: usize) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidGraph("graph needs at least one node".into()));
        }
        Ok(Self {
            node_count,
            edges: BTreeMap::new(),
        })
    }

    pub fn from_edges(node_count: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = Self::new(node_count)?;
        for &(i, j, w) in edges {
            g.add_edge(i, j, w)?;
        }
        Ok(g)
    }

    pub fn complete(node_count: usize) -> Result<Self> {
        let mut g = Self::new(node_count)?;
        for i in 0..node_count {
            for j in i + 1..node_count {
                g.add_edge(i, j, 1.0)?;
            }
        }
        Ok(g)
    }

    /// Star with the given center; every other node is a leaf.
    pub fn star(node_count: usize, center: usize) -> Result<Self> {
        let mut g = Self::new(node_count)?;
        for leaf in (0..node_count).filter(|&v| v != center) {
            g.add_edge(center, leaf, 1.0)?;
        }
        Ok(g)
    }

    pub fn path(node_count: usize) -> Result<Self> {
        let mut g = Self::new(node_count)?;
        for i in 1..node_count {
            g.add_edge(i - 1, i, 1.0)?;
        }
        Ok(g)
    }

    pub fn ring(node_count: usize) -> Result<Self> {
        let mut g = Self::path(node_count)?;
        if node_count > 2 {
            g.add_edge(node_count - 1, 0, 1.0)?;
        }
        Ok(g)
    }

    /// Inserts or overwrites the edge `{i, j}`.
    pub fn add_edge(&mut self, i: usize, j: usize, weight: f64) -> Result<()> {
        if i == j {
            return Err(Error::InvalidGraph(format!("self-loop at node {i}")));
        }
        if i >= self.node_count || j >= self.node_count {
            return Err(Error::InvalidGraph(format!(
                "edge ({i}, {j}) outside node range [0, {})",
                self.node_count
            )));
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidGraph(format!(
                "edge ({i}, {j}) has non-positive weight {weight}"
            )));
        }
        self.edges.insert(key(i, j), weight);
        Ok(())
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) -> Option<f64> {
        self.edges.remove(&key(i, j))
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains_key(&key(i, j))
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(i, j, w)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges()
            .filter_map(|(i, j, _)| match (i == v, j == v) {
                (true, _) => Some(j),
                (_, true) => Some(i),
                _ => None,
            })
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges().filter(|&(i, j, _)| i == v || j == v).count()
    }

    /// Number of connected components (union-find).
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.node_count).collect();
        fn find(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        let mut components = self.node_count;
        for (i, j, _) in self.edges() {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri] = rj;
                components -= 1;
            }
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    /// Dense weighted Laplacian, row-major `m x m`.
    pub fn laplacian(&self) -> Vec<f64> {
        let m = self.node_count;
        let mut l = vec![0.0; m * m];
        for (i, j, w) in self.edges() {
            l[i * m + j] -= w;
            l[j * m + i] -= w;
            l[i * m + i] += w;
            l[j * m + j] += w;
        }
        l
    }
}

fn key(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}
