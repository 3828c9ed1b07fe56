//! Yang-Baxter gates, braid circuits and their classical simulation.

pub mod braid;
pub mod clifford_sim;
pub mod error;
pub mod linalg;
pub mod mc_sim;
pub mod perm;
pub mod solutions;
pub mod ybe;

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool for `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> error::Result<T> {
    match threads {
        Some(0) => Err(error::Error::InvalidInput("thread count must be positive".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| error::Error::InvalidInput(format!("thread pool: {e}"))),
        None => Ok(f()),
    }
}
