//! Thread pool shared by assembly loops. `SOLVER_THREADS` caps its size.

use std::sync::OnceLock;

use rayon::prelude::*;

pub fn threads() -> usize {
    static N: OnceLock<usize> = OnceLock::new();
    *N.get_or_init(|| {
        let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
        match std::env::var("SOLVER_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
            Some(n) if n >= 1 => n.min(cores.max(1) * 4),
            _ => cores,
        }
    })
}

pub fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads())
            .build()
            .expect("thread pool")
    })
}

/// Runs `f` on consecutive chunks of `0..n` and concatenates the results in
/// chunk order, so the output does not depend on scheduling.
pub fn map_chunks<T: Send>(n: usize, chunk: usize, f: impl Fn(std::ops::Range<usize>) -> Vec<T> + Sync) -> Vec<T> {
    let ranges: Vec<_> = (0..n.div_ceil(chunk)).map(|k| k * chunk..((k + 1) * chunk).min(n)).collect();
    let parts: Vec<Vec<T>> = pool().install(|| ranges.into_par_iter().map(&f).collect());
    parts.into_iter().flatten().collect()
}
