//! Index-parallel execution. Work item `i` always draws from random stream `i`, so
//! results do not depend on the number of threads.

use anyhow::{Context, Result};
use rayon::prelude::*;

pub fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build().context("building thread pool")
}

/// `f(0), ..., f(n-1)` in index order.
pub fn map_indexed<T, F>(pool: &rayon::ThreadPool, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    pool.install(|| (0..n as u64).into_par_iter().map(&f).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_kept() {
        let p = pool(Some(3)).unwrap();
        let v = map_indexed(&p, 1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, x)| *x == (i * i) as u64));
    }
}
