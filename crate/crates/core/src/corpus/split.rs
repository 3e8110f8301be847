use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CorpusError, ParallelCorpus};

/// Default size of each held-out set.
pub const DEFAULT_HELDOUT: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSplit {
    pub train: ParallelCorpus,
    pub dev: ParallelCorpus,
    pub test: ParallelCorpus,
}

/// Seeded random train/dev/test partition. Each part keeps the original
/// corpus order.
pub fn split_corpus(
    corpus: &ParallelCorpus,
    n_dev: usize,
    n_test: usize,
    seed: u64,
) -> Result<CorpusSplit, CorpusError> {
    let requested = n_dev + n_test;
    if requested > corpus.len() {
        return Err(CorpusError::InsufficientData {
            requested,
            available: corpus.len(),
        });
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut dev_idx = order[..n_dev].to_vec();
    let mut test_idx = order[n_dev..requested].to_vec();
    let mut train_idx = order[requested..].to_vec();
    let take = |idx: &mut Vec<usize>| {
        idx.sort_unstable();
        corpus.with_pairs(idx.iter().map(|&i| corpus.pairs[i].clone()).collect())
    };
    Ok(CorpusSplit {
        train: take(&mut train_idx),
        dev: take(&mut dev_idx),
        test: take(&mut test_idx),
    })
}
