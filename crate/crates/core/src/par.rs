//! Replication-level fan-out.
//!
//! Results always come back in replication order, and callers reduce them
//! sequentially, so output does not depend on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Runs `f(0), f(1), ..., f(count - 1)` and returns the results in index order.
pub fn replicate<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        replicate_parallel(count, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        replicate_sequential(count, f)
    }
}

pub fn replicate_sequential<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..count as u64).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn replicate_parallel<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..count as u64).into_par_iter().map(f).collect()
}

/// Runs `f` with a pool of `threads` workers (`None` keeps the global pool).
pub fn with_threads<R, F>(threads: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        if let Some(t) = threads {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                return pool.install(f);
            }
        }
        f()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v = replicate(1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i as u64));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let f = |i: u64| ((i as f64) * 0.37).sin();
        let a = with_threads(Some(1), || replicate(500, f));
        let b = with_threads(Some(3), || replicate(500, f));
        assert_eq!(a, replicate_sequential(500, f));
        assert_eq!(a, b);
    }
}
