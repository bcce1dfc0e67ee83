//! Execution mode for batch work (scans, Monte-Carlo trials).
//!
//! With the `parallel` feature the batch helpers fan out over rayon; without it
//! every mode runs sequentially. Results are collected in index order and merged
//! with integer counters, so output never depends on the mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

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
    /// `f(0), f(1), ..., f(count - 1)` in index order.
    pub fn map<T, F>(self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..count).into_par_iter().map(f).collect(),
            _ => (0..count).map(f).collect(),
        }
    }

    /// Map every index and merge the results with a commutative, associative `merge`.
    pub fn map_reduce<T, F, M>(self, count: u64, identity: T, f: F, merge: M) -> T
    where
        T: Send + Sync + Clone,
        F: Fn(u64) -> T + Sync + Send,
        M: Fn(T, T) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..count)
                .into_par_iter()
                .map(f)
                .reduce(|| identity.clone(), &merge),
            _ => (0..count).map(f).fold(identity, merge),
        }
    }
}

/// SplitMix64 finalizer; used to derive independent per-trial seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `index` under `seed`, further split by `lane`.
pub fn derive_seed(seed: u64, index: u64, lane: u64) -> u64 {
    mix64(mix64(seed ^ mix64(index)) ^ lane.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}
