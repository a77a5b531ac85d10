//! Thread-count control for the enumeration kernels.
//!
//! `SRN_THREADS` caps kernel parallelism; unset or `0` uses rayon's global
//! pool. Kernel results never depend on the thread count.

use std::sync::OnceLock;

use rayon::ThreadPool;

pub const THREADS_ENV: &str = "SRN_THREADS";

static POOL: OnceLock<Option<ThreadPool>> = OnceLock::new();

fn pool() -> Option<&'static ThreadPool> {
    POOL.get_or_init(|| {
        let n: usize = std::env::var(THREADS_ENV).ok()?.trim().parse().ok()?;
        if n == 0 {
            return None;
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()
    })
    .as_ref()
}

/// Runs `f` inside the kernel pool.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match pool() {
        Some(p) => p.install(f),
        None => f(),
    }
}
