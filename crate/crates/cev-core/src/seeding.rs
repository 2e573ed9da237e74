//! Deterministic, chunk-parallel random draws.
//!
//! Samples are generated in fixed-size chunks; chunk `i` owns the ChaCha
//! stream `i + 1` of the master seed. The chunk layout depends only on
//! `(n, seed)`, so results are bit-identical no matter how many worker
//! threads rayon uses, and identical to a fully sequential run.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Draws per chunk. Fixed: changing it changes the sample stream.
pub const CHUNK_SIZE: usize = 1 << 16;

/// RNG for one chunk of a seeded experiment.
pub fn chunk_rng(seed: u64, chunk_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk_index + 1);
    rng
}

/// Generate `n` draws with `per_draw`, chunked and order-preserving.
pub fn chunked_draws<T, F>(n: usize, seed: u64, per_draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = chunk_rng(seed, ci as u64);
            let m = CHUNK_SIZE.min(n - ci * CHUNK_SIZE);
            (0..m).map(|_| per_draw(&mut rng)).collect::<Vec<T>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
