//! Seeded, stream-splittable RNG plumbing.
//!
//! Every stochastic routine in the crate derives its randomness from a
//! `(seed, stream)` pair.  Streams are ChaCha counter streams, so a worker
//! that owns stream `k` produces the same numbers no matter how the work is
//! scheduled across threads.  Stream ids are partitioned by purpose to keep
//! path noise and start-point sampling independent.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Streams `[SAMPLER_STREAM_BASE, ..)` are reserved for measure sampling;
/// lower ids belong to per-path simulation noise.
pub const SAMPLER_STREAM_BASE: u64 = 1 << 32;

/// Deterministic generator for `(seed, stream)`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Map work items to a fixed vector, in order, optionally in parallel.
///
/// The closure sees the item index; outputs are collected in index order so
/// the result is identical for any thread count (and for the sequential
/// build).
pub fn maybe_par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential reference version of [`maybe_par_map`], kept unconditionally
/// for benchmarks that compare the two schedules.
pub fn seq_map<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Run `f` inside a dedicated pool of `threads` workers (no-op without the
/// `parallel` feature or when `threads` is `None`).  Results are identical
/// either way; only the schedule changes.
pub fn run_with_threads<T, F>(threads: Option<usize>, f: F) -> T
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = threads {
            return rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool")
                .install(f);
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn substreams_are_deterministic_and_distinct() {
        let mut a = substream(7, 0);
        let mut b = substream(7, 0);
        let mut c = substream(7, 1);
        let xa: f64 = a.random();
        let xb: f64 = b.random();
        let xc: f64 = c.random();
        assert_eq!(xa.to_bits(), xb.to_bits());
        assert_ne!(xa.to_bits(), xc.to_bits());
    }

    #[test]
    fn par_map_matches_seq_map() {
        let par = maybe_par_map(100, |i| {
            let mut rng = substream(3, i as u64);
            rng.random::<f64>()
        });
        let seq = seq_map(100, |i| {
            let mut rng = substream(3, i as u64);
            rng.random::<f64>()
        });
        assert_eq!(par, seq);
    }
}
