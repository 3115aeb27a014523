//! Counter-based seed splitting.
//!
//! Every random draw in a run comes from a generator keyed by
//! `(master seed, purpose, step, node)`, so results do not depend on the
//! order in which nodes are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags for substreams.
pub mod tag {
    pub const GRAPH: u64 = 1;
    pub const BATCH: u64 = 2;
    pub const SNAPSHOT: u64 = 3;
    pub const RESTART: u64 = 4;
    pub const CHI_PROBE: u64 = 5;
    pub const PARTITION: u64 = 6;
    pub const INIT: u64 = 7;
    pub const ESTIMATE: u64 = 8;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a list of counters into a 64-bit key.
pub fn derive_seed(master: u64, counters: &[u64]) -> u64 {
    counters.iter().fold(splitmix64(master), |acc, &c| {
        splitmix64(acc ^ splitmix64(c))
    })
}

pub fn substream(master: u64, counters: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, counters))
}
