//! Element-loop execution policy.
//!
//! Every data-parallel loop in the crate goes through [`Execution::map`], which
//! evaluates a closure per index and returns the results in index order. The
//! caller then reduces or scatters sequentially, so results are bit-identical
//! whichever policy ran the loop.

/// How element loops are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Plain loop on the calling thread.
    Sequential,
    /// Rayon work-stealing over the global pool. Falls back to
    /// [`Execution::Sequential`] when the `parallel` feature is disabled.
    #[default]
    Parallel,
}

impl Execution {
    /// Reads `BRINKMAN_THREADS`; a value of `1` selects the sequential path.
    pub fn from_env() -> Self {
        match std::env::var("BRINKMAN_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            Some(1) => Execution::Sequential,
            _ => Execution::Parallel,
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Evaluates `f(0..n)` and collects the results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Sums `f(i)` over `0..n` in index order.
    pub fn sum<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        // collect-then-fold keeps the summation order fixed
        self.map(n, f).into_iter().fold(0.0, |acc, v| acc + v)
    }
}
