//! Index-parallel map with a sequential fallback when the `parallel`
//! feature is off. Every output slot is produced by exactly one task, so
//! results do not depend on the schedule.

#[cfg(feature = "parallel")]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Whether this build runs parallel loops.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
