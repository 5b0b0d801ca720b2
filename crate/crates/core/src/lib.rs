//! Variant-aware chess evaluation harness.
//!
//! The rules kernel and notation codecs sit at the bottom; on top of them are
//! the out-of-distribution board generators, a UCI engine client, a uniform
//! policy abstraction, the move-quality metrics, a tournament driver with
//! relative Elo estimation, distribution probes, dataset storage and an
//! optional online bot bridge.

pub mod arena;
pub mod datahub;
pub mod elo;
pub mod engine;
pub mod kernel;
pub mod lichess;
pub mod metrics;
pub mod notation;
pub mod ood;
pub mod policy;
pub mod probes;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The one RNG used everywhere a seed is accepted.
pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
