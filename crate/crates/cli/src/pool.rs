use rayon::prelude::*;
use xyconv_core::Executor;

/// Environment variable that overrides the worker count.
pub const WORKERS_ENV: &str = "XYCONV_WORKERS";

/// Bounded worker pool; results keep input order.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    /// `workers` wins over the environment; the default is one per core.
    pub fn new(workers: Option<usize>) -> Result<Self, String> {
        let count = match workers {
            Some(n) => n,
            None => match std::env::var(WORKERS_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| format!("{WORKERS_ENV} must be a positive integer (got `{v}`)"))?,
                Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
            },
        };
        if count == 0 {
            return Err("worker count must be at least 1".into());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build()
            .map_err(|e| e.to_string())?;
        Ok(Pool { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync,
    {
        self.pool
            .install(|| items.par_iter().map(|x| f(x)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_input_order() {
        let pool = Pool::new(Some(3)).unwrap();
        let items: Vec<u64> = (0..1000).collect();
        let out = pool.map(&items, |x| x * x);
        assert_eq!(out, items.iter().map(|x| x * x).collect::<Vec<_>>());
        assert_eq!(pool.workers(), 3);
        assert!(Pool::new(Some(0)).is_err());
    }
}
