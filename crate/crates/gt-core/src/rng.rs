//! Deterministic random-stream derivation.
//!
//! Every random quantity in this crate is drawn from a ChaCha stream whose
//! 256-bit seed is derived by hashing `(master_seed, label, indices)` through
//! a two-lane SplitMix sponge (128 bits of state). Streams therefore depend
//! only on their explicit inputs, never on thread scheduling, call order, or
//! global state, and two calls with equal inputs yield bit-identical draws.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const LANE_B: u64 = 0xd1b5_4a32_d192_ed03;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 128-bit absorbing hash used to derive stream seeds.
#[derive(Debug, Clone, Copy)]
pub struct StreamHash {
    lo: u64,
    hi: u64,
}

impl StreamHash {
    pub fn new(master_seed: u64) -> Self {
        StreamHash {
            lo: splitmix(master_seed ^ GOLDEN),
            hi: splitmix(master_seed.wrapping_add(GOLDEN) ^ LANE_B),
        }
    }

    /// Absorb one word into both lanes.
    #[must_use]
    pub fn mix(self, v: u64) -> Self {
        StreamHash {
            lo: splitmix(self.lo ^ v.wrapping_mul(GOLDEN)),
            hi: splitmix(self.hi.wrapping_add(v).wrapping_mul(LANE_B | 1) ^ v.rotate_left(23)),
        }
    }

    /// Absorb a label; the length is mixed in so that distinct labels with a
    /// shared prefix cannot collide with concatenated index data.
    #[must_use]
    pub fn mix_label(self, label: &str) -> Self {
        let mut h = self.mix(label.len() as u64);
        for chunk in label.as_bytes().chunks(8) {
            let mut w = [0u8; 8];
            w[..chunk.len()].copy_from_slice(chunk);
            h = h.mix(u64::from_le_bytes(w));
        }
        h
    }

    /// Expand the state into a 256-bit ChaCha seed.
    pub fn rng(self) -> ChaCha12Rng {
        let mut seed = [0u8; 32];
        let mut a = self.lo;
        let mut b = self.hi;
        for i in 0..2 {
            a = splitmix(a.wrapping_add(GOLDEN));
            b = splitmix(b.wrapping_add(LANE_B));
            seed[16 * i..16 * i + 8].copy_from_slice(&a.to_le_bytes());
            seed[16 * i + 8..16 * i + 16].copy_from_slice(&b.to_le_bytes());
        }
        ChaCha12Rng::from_seed(seed)
    }
}

/// Derive the ChaCha stream for `(master_seed, label, indices)`.
pub fn stream(master_seed: u64, label: &str, indices: &[u64]) -> ChaCha12Rng {
    let mut h = StreamHash::new(master_seed).mix_label(label);
    for &ix in indices {
        h = h.mix(ix);
    }
    h.rng()
}
