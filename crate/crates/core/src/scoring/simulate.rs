//! Monte Carlo estimate of chance-level scores.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec::{self, Execution};

const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedScores {
    pub pairs: usize,
    pub single: f64,
    pub group: f64,
}

/// Scores a uniform random binary predictor on `n_pairs` balanced twin pairs
/// (golds 0 and 1 within each pair). Each chunk of pairs draws from its own
/// ChaCha stream, so the result depends only on `seed`, not on execution mode.
pub fn simulate_uniform_pairs(n_pairs: usize, seed: u64, execution: Execution) -> SimulatedScores {
    let chunks = n_pairs.div_ceil(CHUNK);
    let per_chunk = exec::map_range(execution, 0..chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let len = CHUNK.min(n_pairs - c * CHUNK);
        let mut correct = 0usize;
        let mut both = 0usize;
        for _ in 0..len {
            let first = rng.random_range(0..2usize) == 0;
            let second = rng.random_range(0..2usize) == 1;
            correct += usize::from(first) + usize::from(second);
            both += usize::from(first && second);
        }
        (correct, both)
    });
    let (correct, both) = per_chunk.into_iter().fold((0, 0), |(a, b), (c, d)| (a + c, b + d));
    let n = n_pairs.max(1) as f64;
    SimulatedScores {
        pairs: n_pairs,
        single: correct as f64 / (2.0 * n),
        group: both as f64 / n,
    }
}
