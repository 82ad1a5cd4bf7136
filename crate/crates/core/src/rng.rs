//! Seed derivation.
//!
//! A stream is identified by a master seed and a label (a purpose tag plus a
//! list of integer coordinates). The label is folded into the master seed
//! with SplitMix64 and the purpose tag is hashed with 64-bit FNV-1a, so the
//! derivation is easy to reproduce elsewhere:
//!
//! ```text
//! s = master
//! for w in [fnv1a64(purpose), coords...]: s = splitmix64(s ^ w)
//! seed bytes = le(splitmix64(s + 1)) || le(splitmix64(s + 2)) || ... (4 words)
//! ```
//!
//! The 32 bytes seed a `ChaCha8Rng`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamLabel {
    pub purpose: String,
    pub coords: Vec<u64>,
}

impl StreamLabel {
    pub fn new(purpose: impl Into<String>) -> Self {
        StreamLabel { purpose: purpose.into(), coords: Vec::new() }
    }

    pub fn with(mut self, coord: u64) -> Self {
        self.coords.push(coord);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub label: StreamLabel,
}

impl RngStream {
    pub fn new(master_seed: u64, label: StreamLabel) -> Self {
        RngStream { master_seed, label }
    }

    pub fn root(master_seed: u64, purpose: &str) -> Self {
        Self::new(master_seed, StreamLabel::new(purpose))
    }

    /// Folded 64-bit state for this label.
    pub fn state(&self) -> u64 {
        let mut s = splitmix64(self.master_seed ^ fnv1a64(self.label.purpose.as_bytes()));
        for &w in &self.label.coords {
            s = splitmix64(s ^ w);
        }
        s
    }

    pub fn seed_bytes(&self) -> [u8; 32] {
        let s = self.state();
        let mut out = [0u8; 32];
        for (i, chunk) in out.chunks_exact_mut(8).enumerate() {
            chunk.copy_from_slice(&splitmix64(s.wrapping_add(i as u64 + 1)).to_le_bytes());
        }
        out
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.seed_bytes())
    }

    /// Sub-stream with a further coordinate appended.
    pub fn child(&self, coord: u64) -> Self {
        RngStream { master_seed: self.master_seed, label: self.label.clone().with(coord) }
    }

    /// Sub-stream for a named sub-purpose.
    pub fn named(&self, purpose: &str) -> Self {
        self.child(fnv1a64(purpose.as_bytes()))
    }
}
