//! Counter-based randomness for lazily sampled automorphisms.
//!
//! Every random primitive owns a ChaCha8 key derived from its 64-bit seed.
//! The local permutation at a vertex is drawn from the ChaCha stream whose
//! nonce is a hash of the vertex word, so the value at a vertex never depends
//! on the order in which vertices are queried.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::tree::MAX_DEGREE;

pub(crate) type Key = [u8; 32];

pub(crate) fn key_from_seed(seed: u64) -> Key {
    ChaCha8Rng::seed_from_u64(seed).get_seed()
}

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combines two values into a derived seed; used for per-trial and
/// per-coordinate seeding.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

pub(crate) const ROOT_HASH: u64 = 0x6a09_e667_f3bc_c908;

/// Hash of the vertex word extended by one letter.
#[inline]
pub(crate) fn extend_hash(h: u64, letter: u8) -> u64 {
    mix64(h.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(letter as u64 + 1))
}

#[cfg(test)]
fn vertex_hash(letters: &[u8]) -> u64 {
    letters.iter().fold(ROOT_HASH, |h, &c| extend_hash(h, c))
}

/// A uniform permutation of `0..n` drawn from the stream `nonce` of `key`.
pub(crate) fn sample_perm(key: &Key, nonce: u64, n: usize) -> ([u8; MAX_DEGREE], usize) {
    let mut rng = ChaCha8Rng::from_seed(*key);
    rng.set_stream(nonce);
    let mut perm = [0u8; MAX_DEGREE];
    for (i, p) in perm.iter_mut().enumerate().take(n) {
        *p = i as u8;
    }
    perm[..n].shuffle(&mut rng);
    (perm, n)
}
