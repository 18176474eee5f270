//! Execution-mode plumbing: data-parallel campaigns via rayon (feature
//! `parallel`, default on) with an always-available sequential fallback.
//!
//! The environment variable `WDVV_LAB_THREADS` caps the worker count
//! (0 or unset = automatic). With the `parallel` feature disabled every
//! request degrades to sequential execution.

/// How a campaign maps work over its sample points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    /// Rayon thread pool; falls back to sequential when the `parallel`
    /// feature is compiled out.
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        ExecMode::Parallel
    }
}

/// Worker cap from `WDVV_LAB_THREADS` (0 = auto).
pub fn thread_cap() -> usize {
    std::env::var("WDVV_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0)
}

#[cfg(feature = "parallel")]
mod pool {
    use std::sync::OnceLock;

    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();

    pub fn get() -> &'static rayon::ThreadPool {
        POOL.get_or_init(|| {
            let mut builder = rayon::ThreadPoolBuilder::new();
            let cap = super::thread_cap();
            if cap > 0 {
                builder = builder.num_threads(cap);
            }
            builder.build().expect("failed to build rayon pool")
        })
    }
}

/// Maps `f` over `0..n`, preserving index order in the output.
pub fn map_indexed<T, F>(n: usize, mode: ExecMode, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                pool::get().install(|| (0..n).into_par_iter().map(f).collect())
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: usize| (i * i) as u64;
        assert_eq!(
            map_indexed(100, ExecMode::Sequential, f),
            map_indexed(100, ExecMode::Parallel, f)
        );
    }
}
