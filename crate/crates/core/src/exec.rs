//! Data-parallel execution of independent trials.
//!
//! With the `parallel` feature (on by default) trials fan out over the rayon
//! pool; without it, [`Execution::Parallel`] quietly runs sequentially. Each
//! trial draws from its own ChaCha stream keyed by `(seed, trial)`, so both
//! modes produce bit-identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
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
    /// `[f(0), f(1), …, f(n−1)]`, in index order regardless of mode.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            Execution::Parallel => parallel_map(n, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Stream of the coin-plate angle errors of a run.
pub const JITTER_STREAM: u64 = 0;
/// Stream of the preparation-plate angle errors.
pub const PREPARATION_STREAM: u64 = 1;
/// Stream of the multinomial detection draw.
pub const SAMPLING_STREAM: u64 = 2;
/// Bootstrap resample `t` uses stream `BOOTSTRAP_STREAM + t`.
pub const BOOTSTRAP_STREAM: u64 = 1 << 32;

/// Generator for trial `stream` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
