//! Thread-pool executor.

use rayon::prelude::*;
use rayon::ThreadPool;
use vlasov_core::exec::Executor;

use crate::HarnessError;

/// Runs per-index work on a dedicated rayon pool. Results come back in index
/// order and each index is evaluated exactly as the serial executor would, so
/// outputs do not depend on the thread count.
pub struct RayonExecutor {
    pool: ThreadPool,
}

impl RayonExecutor {
    /// `threads = 0` lets rayon choose.
    pub fn new(threads: usize) -> Result<Self, HarnessError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
        Ok(Self { pool })
    }

    /// Thread count from [`THREADS_VAR`](crate::THREADS_VAR), else rayon's default.
    pub fn from_env() -> Result<Self, HarnessError> {
        let threads = match std::env::var(crate::THREADS_VAR) {
            Ok(v) => v.trim().parse().map_err(|_| {
                HarnessError::Config(format!("{}={v} is not a thread count", crate::THREADS_VAR))
            })?,
            Err(_) => 0,
        };
        Self::new(threads)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for RayonExecutor {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..n).into_par_iter().map(f).collect())
    }

    fn update_indexed<P, T, F>(&self, items: &mut [P], f: F) -> Vec<T>
    where
        P: Send,
        T: Send,
        F: Fn(usize, &mut P) -> T + Sync + Send,
    {
        self.pool.install(|| {
            items
                .par_iter_mut()
                .enumerate()
                .map(|(i, p)| f(i, p))
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use vlasov_core::exec::Serial;

    #[test]
    fn matches_serial() {
        let ex = RayonExecutor::new(3).unwrap();
        let f = |i: usize| (i as f64).sqrt().sin();
        assert_eq!(ex.map_indexed(1000, f), Serial.map_indexed(1000, f));
        let mut a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let mut b = a.clone();
        let ra = ex.update_indexed(&mut a, |i, x| {
            *x *= 1.5;
            i
        });
        let rb = Serial.update_indexed(&mut b, |i, x| {
            *x *= 1.5;
            i
        });
        assert_eq!((a, ra), (b, rb));
    }
}
