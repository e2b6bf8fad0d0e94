//! Replica farm: independent replicas evaluated in parallel, results returned
//! in replica order so output never depends on worker scheduling.

use rayon::prelude::*;

/// Evaluates `f(i)` for `i in 0..replicas` and returns the results in index order.
pub fn run_replicas<T, F>(replicas: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..replicas).into_par_iter().map(f).collect()
}
