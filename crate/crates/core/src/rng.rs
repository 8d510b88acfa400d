//! Deterministic random streams.
//!
//! Every Monte Carlo job is split into a fixed number of chunks. Chunk `k`
//! draws from ChaCha8 stream `k` of the job seed, so results depend only on
//! the seed and never on how many worker threads happen to run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type LabRng = ChaCha8Rng;

/// Chunk count used by every parallel driver.
pub const CHUNKS: usize = 64;

/// Generator for stream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> LabRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer, used to derive independent seeds for grid points.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Split `n` into `chunks` counts differing by at most one, larger first.
pub fn chunk_sizes(n: usize, chunks: usize) -> Vec<usize> {
    let base = n / chunks;
    let extra = n % chunks;
    (0..chunks).map(|k| base + usize::from(k < extra)).collect()
}

/// Run `f(rng_k, n_k)` for every chunk in parallel and return the results in
/// chunk order.
pub fn par_chunks<T, F>(seed: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut LabRng, usize) -> T + Sync,
{
    chunk_sizes(n, CHUNKS)
        .into_par_iter()
        .enumerate()
        .map(|(k, nk)| {
            let mut rng = substream(seed, k as u64);
            f(&mut rng, nk)
        })
        .collect()
}

/// Draw `n` values in parallel, returned in a thread-count independent order.
pub fn par_draws<T, F>(seed: u64, n: usize, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut LabRng) -> T + Sync,
{
    par_chunks(seed, n, |rng, nk| (0..nk).map(|_| draw(rng)).collect::<Vec<T>>())
        .into_iter()
        .flatten()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn chunk_sizes_sum_to_n() {
        for n in [0, 1, 63, 64, 65, 1_000_003] {
            let s = chunk_sizes(n, CHUNKS);
            assert_eq!(s.iter().sum::<usize>(), n);
            assert!(s.iter().max().unwrap() - s.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn streams_differ_and_repeat() {
        let a: u64 = substream(7, 0).random();
        let b: u64 = substream(7, 1).random();
        let c: u64 = substream(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn parallel_result_independent_of_pool_size() {
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| par_draws(11, 5000, |r| r.random::<f64>()))
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|k| derive_seed(3, k)).collect();
        assert_eq!(s.len(), 1000);
    }
}
