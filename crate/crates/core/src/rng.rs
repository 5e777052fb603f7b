//! Deterministic random streams.
//!
//! Every generator in this crate draws from a ChaCha8 stream keyed by a
//! 64-bit master seed. Independent substreams (one per generation chunk, or
//! one per purpose) are selected through ChaCha's 64-bit stream id, so two
//! substreams never overlap and a substream's contents do not depend on how
//! many other substreams were consumed or on which thread consumed them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Default seed used by the CLI when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0x0005_eed0_fb16_da7a;

/// Stream ids at or above this value are reserved for purpose-specific
/// streams so they cannot collide with chunk indices.
const PURPOSE_BASE: u64 = 1 << 63;

/// Purpose-specific substreams for single-stream generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    TraceContent = 1,
    TraceTiming = 2,
    Shuffle = 3,
    Reference = 4,
}

/// Stream for generation chunk `chunk_index` under `master_seed`.
pub fn chunk_rng(master_seed: u64, chunk_index: u64) -> StreamRng {
    assert!(chunk_index < PURPOSE_BASE, "chunk index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(chunk_index);
    rng
}

pub fn purpose_rng(master_seed: u64, purpose: Purpose) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(PURPOSE_BASE | purpose as u64);
    rng
}

/// Uniform draw in (0, 1], safe to pass to `ln`.
pub fn open_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}
