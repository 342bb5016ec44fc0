//! Per-rank data parallelism with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers fan out over rayon's
//! global pool; without it they run in rank order. Output order is always
//! rank order, so results never depend on the schedule.

/// How the simulator steps through ranks within a phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Schedule {
    /// One rank after another, in rank order.
    Sequential,
    /// Ranks run concurrently on the rayon pool when the `parallel` feature
    /// is enabled; otherwise identical to `Sequential`.
    #[default]
    Parallel,
}

/// Maps `f` over `0..n`, in parallel when the feature is enabled.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_range_with(Schedule::Parallel, n, f)
}

pub fn map_range_with<T, F>(schedule: Schedule, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match schedule {
        Schedule::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Schedule::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        Schedule::Parallel => (0..n).map(f).collect(),
    }
}

/// Fallible variant; the first error in rank order wins.
pub fn try_map_range_with<T, E, F>(schedule: Schedule, n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_range_with(schedule, n, f).into_iter().collect()
}
