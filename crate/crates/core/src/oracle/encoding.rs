//! Seeded injective encodings `Z_{2^t}^n -> {0,1}^l`.
//!
//! The group element is packed into an `n*t`-bit integer, pushed through a
//! keyed Feistel permutation (cycle-walking when `n*t` is odd) and zero padded
//! to `l` bits.

use std::fmt;

use serde::{Deserialize, Serialize};

const ROUNDS: u64 = 6;

/// splitmix64 finalizer.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// An `l`-bit oracle output.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Codeword {
    bits: u32,
    words: Vec<u64>,
}

impl Codeword {
    pub fn len(&self) -> u32 {
        self.bits
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Codeword[{}](", self.bits)?;
        for w in self.words.iter().rev() {
            write!(f, "{w:016x}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Encoding {
    key: u64,
    domain_bits: u32,
    width: u32,
    l: u32,
}

impl Encoding {
    pub fn new(key: u64, domain_bits: u32, l: u32) -> Self {
        debug_assert!(domain_bits <= 64 && l >= domain_bits);
        let width = (domain_bits.max(2) + 1) & !1;
        Self {
            key,
            domain_bits,
            width,
            l,
        }
    }

    fn round(&self, round: u64, half: u64) -> u64 {
        mix64(self.key ^ mix64(round.wrapping_mul(0xD6E8_FEB8_6659_FD93) ^ half))
    }

    fn feistel(&self, x: u64) -> u64 {
        let half_bits = self.width / 2;
        let half_mask = (1u64 << half_bits) - 1;
        let mut left = (x >> half_bits) & half_mask;
        let mut right = x & half_mask;
        for r in 0..ROUNDS {
            let next = left ^ (self.round(r, right) & half_mask);
            left = right;
            right = next;
        }
        (left << half_bits) | right
    }

    /// Keyed permutation of `[0, 2^domain_bits)`.
    pub fn permute(&self, x: u64) -> u64 {
        let limit_mask = if self.domain_bits >= 64 {
            u64::MAX
        } else {
            (1u64 << self.domain_bits) - 1
        };
        debug_assert_eq!(x & !limit_mask, 0);
        let mut y = self.feistel(x);
        while y & !limit_mask != 0 {
            y = self.feistel(y);
        }
        y
    }

    pub fn encode(&self, index: u64) -> Codeword {
        let mut words = vec![0u64; (self.l as usize).div_ceil(64).max(1)];
        words[0] = self.permute(index);
        Codeword { bits: self.l, words }
    }
}
