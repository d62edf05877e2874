//! Execution policy for independent batches (sweep points, samples).

/// How a batch of independent jobs is run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon pool; `None` uses the global pool. Without the `parallel`
    /// feature this behaves like `Sequential`.
    #[default]
    Parallel,
    ParallelWith(usize),
}

impl Execution {
    /// `jobs == 1` is sequential, `0` means all cores.
    pub fn from_jobs(jobs: usize) -> Execution {
        match jobs {
            0 => Execution::Parallel,
            1 => Execution::Sequential,
            n => Execution::ParallelWith(n),
        }
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            Execution::Parallel => par_map(items, f),
            Execution::ParallelWith(n) => with_pool(n, || par_map(items, &f)),
        }
    }
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(items: &[T], f: F) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(items: &[T], f: F) -> Vec<R> {
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
fn with_pool<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(op),
        Err(_) => op(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_pool<R: Send>(_threads: usize, op: impl FnOnce() -> R + Send) -> R {
    op()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree_and_keep_order() {
        let items: Vec<u64> = (0..200).collect();
        let f = |x: &u64| x * x + 1;
        let seq = Execution::Sequential.map(&items, f);
        assert_eq!(seq, Execution::Parallel.map(&items, f));
        assert_eq!(seq, Execution::ParallelWith(3).map(&items, f));
        assert_eq!(seq[199], 199 * 199 + 1);
    }

    #[test]
    fn jobs_mapping() {
        assert_eq!(Execution::from_jobs(1), Execution::Sequential);
        assert_eq!(Execution::from_jobs(0), Execution::Parallel);
        assert_eq!(Execution::from_jobs(4), Execution::ParallelWith(4));
    }
}
