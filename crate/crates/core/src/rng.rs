//! Seeding scheme.
//!
//! A path is generated from a single `u64` seed. Inside a path, each role
//! (primary innovations, the independent copy used for coupling, ...) reads
//! its own ChaCha8 stream selected with `set_stream`, so adding draws to one
//! role never shifts another. Ensembles derive replicate seeds from
//! `(master, index)` with a SplitMix64 finalizer; workers may process
//! replicates in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Identifier echoed in reports and the manifest.
pub const SEED_SCHEME: &str = "chacha8-stream/splitmix64-replicate/v1";

/// Stream ids used inside one path.
pub mod streams {
    pub const PRIMARY: u64 = 0;
    pub const COUPLING: u64 = 1;
    pub const SECOND_COPY: u64 = 2;
    pub const REFERENCE: u64 = 3;
    pub const AUXILIARY: u64 = 4;
}

#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `index` under `master`.
#[inline]
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_mul(0xd1b5_4a32_d192_ed03)))
}

/// Generator for one role of one path.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `job(index, seed)` for every replicate and returns the results in
/// replicate order, whatever the size of the thread pool.
pub fn replicates<T, F>(reps: usize, master: u64, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync + Send,
{
    (0..reps)
        .into_par_iter()
        .map(|r| job(r, replicate_seed(master, r as u64)))
        .collect()
}
