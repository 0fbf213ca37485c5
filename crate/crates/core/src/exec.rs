//! Trial-level execution strategy.
//!
//! Every Monte Carlo loop in the crate goes through [`Exec::map`], which
//! returns results in index order. With the `parallel` feature the work is
//! spread over the current rayon pool; without it, [`Exec::Parallel`]
//! falls back to a plain loop. Results are identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Evaluates `f(0..n)` and collects the results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Number of indices in `0..n` for which `pred` holds.
    pub fn count<F>(self, n: usize, pred: F) -> u64
    where
        F: Fn(usize) -> bool + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().filter(|&i| pred(i)).count() as u64,
            _ => (0..n).filter(|&i| pred(i)).count() as u64,
        }
    }
}
