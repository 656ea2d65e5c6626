//! Seeded FNV-1a hashing used by the Bloom filters and for stable ids.
//!
//! Everything here is fixed-constant and byte-serial, so hashes are
//! identical across runs and platforms.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Default base seeds for the double-hashing scheme. Both fit in an i64 so
/// they survive a round trip through TOML config files.
pub const DEFAULT_SEEDS: [u64; 2] = [0x517c_c1b7_2722_0a95, 0x2545_f491_4f6c_dd1d];

#[inline]
pub fn fnv1a64(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET ^ seed;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Incremental pair of seeded FNV-1a states.
///
/// Feeding `"a"`, then the separator, then `"b"` yields exactly the same
/// digests as hashing the joined string `"a\u{1f}b"`, which lets kterm
/// enumeration hash combinations without materializing key strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairHasher {
    h1: u64,
    h2: u64,
}

impl PairHasher {
    #[inline]
    pub fn new(seeds: [u64; 2]) -> Self {
        Self {
            h1: FNV_OFFSET ^ seeds[0],
            h2: FNV_OFFSET ^ seeds[1],
        }
    }

    #[inline]
    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.h1 ^= u64::from(b);
            self.h1 = self.h1.wrapping_mul(FNV_PRIME);
            self.h2 ^= u64::from(b);
            self.h2 = self.h2.wrapping_mul(FNV_PRIME);
        }
    }

    #[inline]
    pub fn write_byte(&mut self, b: u8) {
        self.h1 ^= u64::from(b);
        self.h1 = self.h1.wrapping_mul(FNV_PRIME);
        self.h2 ^= u64::from(b);
        self.h2 = self.h2.wrapping_mul(FNV_PRIME);
    }

    #[inline]
    pub fn finish(&self) -> (u64, u64) {
        (self.h1, self.h2)
    }
}
