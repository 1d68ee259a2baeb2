//! Index-parallel map with a sequential fallback.
//!
//! Results are always returned in index order, so any reduction over them is
//! independent of the number of workers. With the `parallel` feature
//! disabled, or with `workers == 1`, everything runs on the calling thread.

/// Number of workers to use when the caller passes `0`.
pub fn available_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// `(0..len).map(f)` evaluated on up to `workers` threads (`0` = all cores).
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(len: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let workers = if workers == 0 { available_workers() } else { workers };
    if workers <= 1 || len <= 1 {
        return (0..len).map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..len).into_par_iter().map(&f).collect()),
        Err(e) => {
            log::warn!("thread pool unavailable ({e}); running sequentially");
            (0..len).map(f).collect()
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(len: usize, _workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).map(f).collect()
}
