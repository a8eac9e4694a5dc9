//! Sequential/parallel execution helpers.
//!
//! Every helper returns results in input order and reduces them in a fixed
//! order, so the output does not depend on the worker count. Without the
//! `parallel` feature [`Execution::Parallel`] runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<U, F>(exec: Execution, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Accumulates integer tallies over trials `0..trials` in fixed-size batches.
///
/// `f(trial, tallies)` adds into a zeroed slice of length `width`. Integer
/// addition is associative, so the totals are identical for any schedule.
pub fn tally<F>(exec: Execution, trials: u64, width: usize, batch: u64, f: F) -> Vec<u64>
where
    F: Fn(u64, &mut [u64]) + Sync + Send,
{
    let batch = batch.max(1);
    let batches = trials.div_ceil(batch) as usize;
    let run = |b: usize| {
        let mut acc = vec![0u64; width];
        let start = b as u64 * batch;
        let end = (start + batch).min(trials);
        for t in start..end {
            f(t, &mut acc);
        }
        acc
    };
    let parts = map_range(exec, batches, run);
    let mut total = vec![0u64; width];
    for part in parts {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}

/// Runs `f` on a dedicated pool of `threads` workers (0 = rayon's default).
/// Without the `parallel` feature `f` simply runs on the caller.
pub fn with_threads<R, F>(threads: usize, f: F) -> crate::Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::Error::Domain(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(f())
    }
}
