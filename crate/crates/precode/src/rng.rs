//! Deterministic stream derivation for parallel Monte-Carlo draws.
//!
//! Every random quantity in the crate is drawn from a ChaCha stream keyed by
//! `(seed, stream tag, index a, index b)`. Streams for distinct keys are
//! independent, so realizations, users, and base stations can be drawn in any
//! order (or in parallel) with identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Stream tag for UE placement inside cells.
pub const STREAM_PLACEMENT: u64 = 1;
/// Stream tag for small-scale channel draws.
pub const STREAM_CHANNEL: u64 = 2;
/// Stream tag for test-local randomness.
pub const STREAM_TEST: u64 = 99;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent ChaCha stream from a key tuple.
pub fn derive_rng(seed: u64, stream: u64, a: u64, b: u64) -> ChaCha12Rng {
    let mut state = seed ^ 0xA076_1D64_78BD_642F;
    // Absorb each key component before squeezing so that all four words
    // influence every output byte.
    for part in [seed, stream, a, b] {
        state ^= part.wrapping_mul(0xE703_7ED1_A0B4_28DB);
        let _ = splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}
