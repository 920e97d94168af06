//! Execution mode for data-parallel loops.
//!
//! With the `parallel` feature, [`Execution::Parallel`] runs independent work
//! items on the rayon thread pool; otherwise every mode runs sequentially.
//! Results are always returned in input order, so the output does not depend
//! on the mode or on the number of threads.

/// How independent work items are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    /// One item after another on the calling thread.
    Sequential,
    /// Items spread over the rayon pool when the `parallel` feature is enabled.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Applies `f` to every item and collects the results in input order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }
}

/// Caps the global rayon pool at `threads` workers. Has no effect without the `parallel` feature
/// or once the pool is already running.
pub fn limit_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}
