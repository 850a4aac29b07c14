//! Counter-style random streams.
//!
//! Every random draw in the crate comes from a [`Stream`], a 64-bit key
//! derived from the user seed and a path of labels and indices. The same
//! seed and path always yield the same ChaCha20 generator, regardless of
//! which other streams were consumed before it.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stream {
    key: u64,
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fnv1a64(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream {
            key: splitmix64(seed),
        }
    }

    pub fn child(&self, label: &str) -> Stream {
        Stream {
            key: splitmix64(self.key ^ fnv1a64(label)),
        }
    }

    pub fn index(&self, i: u64) -> Stream {
        Stream {
            key: splitmix64(self.key ^ splitmix64(i.wrapping_add(0x5851_F42D_4C95_7F2D))),
        }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// ChaCha20 generator seeded with four successive splitmix64 outputs of the key.
    pub fn rng(&self) -> StreamRng {
        let mut seed = [0u8; 32];
        let mut s = self.key;
        for chunk in seed.chunks_exact_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        ChaCha20Rng::from_seed(seed)
    }
}
