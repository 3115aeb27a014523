use rand::seq::SliceRandom;

use super::libsvm::Dataset;
use crate::error::{Error, Result};
use crate::objectives::DatasetShard;
use crate::rng::{self, tag};

/// Row indices held by each node: seeded shuffle, then contiguous chunks of
/// `⌊rows/m⌋`, with the remainder handed out one per node from node 0.
pub fn partition_rows(rows: usize, m: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..rows).collect();
    order.shuffle(&mut rng::substream(seed, &[tag::PARTITION]));
    let (base, extra) = (rows / m, rows % m);
    let mut out = Vec::with_capacity(m);
    let mut start = 0;
    for i in 0..m {
        let len = base + usize::from(i < extra);
        out.push(order[start..start + len].to_vec());
        start += len;
    }
    out
}

/// One shard per node with rows dealt round-robin into `n` components.
pub fn partition_dataset(
    data: &Dataset,
    m: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<DatasetShard>> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "need m, n >= 1, got m={m}, n={n}"
        )));
    }
    let per_node = data.len() / m;
    if per_node < n {
        return Err(Error::InvalidData(format!(
            "{} rows cannot give each of {m} nodes {n} nonempty components",
            data.len()
        )));
    }
    partition_rows(data.len(), m, seed)
        .into_iter()
        .enumerate()
        .map(|(node, idx)| {
            let rows = idx.iter().map(|&r| data.rows[r].clone()).collect();
            let labels = idx.iter().map(|&r| data.labels[r]).collect();
            DatasetShard::round_robin(node, rows, labels, n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(rows: usize) -> Dataset {
        Dataset {
            labels: (0..rows)
                .map(|r| if r % 2 == 0 { 1.0 } else { -1.0 })
                .collect(),
            rows: (0..rows).map(|r| vec![r as f64]).collect(),
            dim: 1,
        }
    }

    #[test]
    fn six_rows_two_nodes_three_components() {
        let shards = partition_dataset(&toy(6), 2, 3, 1).unwrap();
        for s in &shards {
            assert_eq!(s.row_count(), 3);
            assert!((0..3).all(|j| s.block(j).len() == 1));
        }
    }

    #[test]
    fn remainder_goes_to_first_nodes() {
        let sizes: Vec<usize> = partition_rows(7, 2, 0).iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![4, 3]);
    }

    #[test]
    fn seeded_assignment_is_stable() {
        assert_eq!(partition_rows(50, 4, 9), partition_rows(50, 4, 9));
        assert_ne!(partition_rows(50, 4, 9), partition_rows(50, 4, 10));
    }

    #[test]
    fn too_few_rows_rejected() {
        assert!(partition_dataset(&toy(5), 2, 3, 0).is_err());
    }
}
