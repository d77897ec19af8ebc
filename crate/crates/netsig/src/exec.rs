//! Rayon-backed executor.

use netsig_core::Executor;
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "NETSIG_THREADS";

pub struct ThreadPoolExecutor {
    pool: rayon::ThreadPool,
}

impl ThreadPoolExecutor {
    pub fn new(threads: usize) -> Result<Self> {
        if threads == 0 {
            return Err(CliError::Config("thread count must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
        Ok(ThreadPoolExecutor { pool })
    }

    /// Uses `NETSIG_THREADS` when set, otherwise every available core.
    pub fn from_env() -> Result<Self> {
        let threads = match std::env::var(THREADS_VAR) {
            Ok(v) => v.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "{THREADS_VAR} must be a positive integer, got `{v}`"
                ))
            })?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        Self::new(threads)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for ThreadPoolExecutor {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..count).into_par_iter().map(&job).collect())
    }
}
