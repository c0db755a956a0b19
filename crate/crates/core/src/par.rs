//! Trial execution: data-parallel under the `parallel` feature, sequential
//! otherwise. Results always come back in trial order, so the two modes
//! produce identical records.

use serde::{Deserialize, Serialize};

use crate::automorphism::stream::derive_seed;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exec {
    Sequential,
    /// The global rayon pool.
    #[default]
    Parallel,
    /// A dedicated pool with this many workers.
    Jobs(usize),
}

impl Exec {
    /// Parallel with `jobs` workers; 0 means the default pool, 1 sequential.
    pub fn with_jobs(jobs: usize) -> Exec {
        match jobs {
            0 => Exec::Parallel,
            1 => Exec::Sequential,
            n => Exec::Jobs(n),
        }
    }
}

/// Runs `f(index, seed)` for every trial index with
/// `seed = derive_seed(master, index)`.
pub fn run_trials<T, F>(exec: Exec, master: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync + Send,
{
    let seeded = |i: usize| f(i, derive_seed(master, i as u64));
    map_indexed(exec, n, seeded)
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_indexed<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match exec {
            Exec::Sequential => {}
            Exec::Parallel => return (0..n).into_par_iter().map(&f).collect(),
            Exec::Jobs(jobs) => {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                    return pool.install(|| (0..n).into_par_iter().map(&f).collect());
                }
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = exec;
    (0..n).map(f).collect()
}
