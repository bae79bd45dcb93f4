//! Execution strategy for per-node work.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] fans work out
//! over the rayon pool. Without it, every strategy runs sequentially. Results
//! are returned in input order either way, so output never depends on the
//! strategy.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many items a parallel map runs sequentially.
pub const PARALLEL_THRESHOLD: usize = 512;

#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this strategy actually runs on the thread pool in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && items.len() >= PARALLEL_THRESHOLD {
            return items.par_iter().with_min_len(MIN_CHUNK).map(f).collect();
        }
        items.iter().map(f).collect()
    }

    pub fn map_index<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && n >= PARALLEL_THRESHOLD {
            return (0..n).into_par_iter().with_min_len(MIN_CHUNK).map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Like [`Execution::map`] but for coarse-grained tasks (sweep points),
    /// parallelised regardless of count.
    pub fn map_tasks<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree_and_preserve_order() {
        let xs: Vec<f64> = (0..5000).map(|i| i as f64 * 0.25).collect();
        let a = Execution::Sequential.map(&xs, |x| x.sin());
        let b = Execution::Parallel.map(&xs, |x| x.sin());
        assert_eq!(a, b);
        let c = Execution::Parallel.map_index(3000, |i| i * 2);
        assert!(c.iter().enumerate().all(|(i, &v)| v == 2 * i));
    }

    #[test]
    fn task_map_keeps_order() {
        let xs = [3, 1, 2];
        assert_eq!(Execution::Parallel.map_tasks(&xs, |x| x * 10), vec![30, 10, 20]);
    }
}
