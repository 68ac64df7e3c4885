//! Data splitting, negative sampling and neighbourhood sampling for
//! minibatch training.

mod batch;
mod block;
mod negative;
mod split;

pub use batch::{BatchConfig, BatchIterator};
pub use block::{sample_block, HopSamples, MiniBatchBlock, NeighborSampler};
pub use negative::{corrupt, CorruptionKind, CorruptionMode, NegativeSample, MAX_CORRUPTION_ATTEMPTS};
pub use split::{split_triplets, SplitKind, SplitSpec, TripletSplit};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

/// Independent deterministic random stream for `(seed, stream)`.
pub fn seeded_rng(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
