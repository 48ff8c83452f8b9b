//! Execution policy for the data-parallel loops (Monte Carlo paths, realizations).
//!
//! Results are always gathered in index order and reduced sequentially, so
//! both policies give bit-identical output for the same seed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecPolicy {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is on, otherwise runs sequentially.
    #[default]
    Parallel,
}

impl ExecPolicy {
    /// `(0..n).map(f).collect()`, possibly in parallel, always in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            ExecPolicy::Sequential => (0..n).map(f).collect(),
            ExecPolicy::Parallel => par_map(n, f),
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecPolicy::Parallel
    }
}

#[cfg(feature = "parallel")]
fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Fixes the worker count of the global pool. Must be called before any parallel work.
pub fn set_worker_threads(n: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot configure worker pool: {e}")))
    }
    #[cfg(not(feature = "parallel"))]
    {
        if n == 0 {
            return Err(Error::Config("worker count must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        assert_eq!(ExecPolicy::Sequential.map(1000, f), ExecPolicy::Parallel.map(1000, f));
    }
}
