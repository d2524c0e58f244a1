//! Deterministic named RNG streams.
//!
//! Every source of randomness in the crate draws from a [`ChaCha8Rng`] keyed
//! by a master seed, a short purpose label, and integer indices. Rollout
//! noise, posterior sampling, and per-(s, a) Dirichlet draws each get their
//! own stream, so changing the Monte Carlo sample count never perturbs the
//! observed trajectory, and per-(s, a) work can run in any order with
//! bit-identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// 64-bit FNV-1a over a byte slice.
fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = state;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

/// SplitMix64 finalizer; expands a 64-bit key into a well-mixed sequence.
fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fold(master: u64, purpose: &str, indices: &[u64]) -> u64 {
    let mut h = fnv1a(0xcbf2_9ce4_8422_2325, &master.to_le_bytes());
    h = fnv1a(h, &(purpose.len() as u64).to_le_bytes());
    h = fnv1a(h, purpose.as_bytes());
    for &ix in indices {
        h = fnv1a(h, &ix.to_le_bytes());
    }
    h
}

/// A deterministic substream keyed by `(master, purpose, indices)`.
pub fn stream(master: u64, purpose: &str, indices: &[u64]) -> ChaCha8Rng {
    let mut key = fold(master, purpose, indices);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut key).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// A derived 64-bit seed, for handing an independent master seed to a sub-run.
pub fn derive_seed(master: u64, purpose: &str, index: u64) -> u64 {
    let mut key = fold(master, purpose, &[index]);
    splitmix64(&mut key)
}
