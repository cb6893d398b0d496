//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a `ChaCha8Rng` seeded with a
//! run-level `u64` seed. Independent consumers are separated with ChaCha's
//! 64-bit stream parameter using the fixed rule
//!
//! ```text
//! stream = replication * 256 + role
//! ```
//!
//! so replication `r` of a run always sees the same numbers for, say, the
//! center sample, no matter how many other replications or workers run
//! alongside it. Sub-experiments (benchmark cells, calibration runs) get
//! their own seed through [`SeedStream::derive`], which hashes a label into
//! the parent seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. The discriminant is the low byte of the
/// ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamRole {
    /// Gaussian draws for DGP lower bounds / centers.
    Center = 0,
    /// DGP3 noise subtracted from the center.
    LowerNoise = 1,
    /// DGP3 noise added to the center.
    UpperNoise = 2,
    /// Row shuffles for cross-validation.
    FoldSplit = 3,
    /// Brownian increments of the high-frequency simulator.
    Paths = 4,
    /// Random test or benchmark instances.
    Instance = 5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    seed: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child seed for a named sub-experiment.
    pub fn derive(&self, label: &str) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(fnv1a(label.as_bytes()))),
        }
    }

    pub fn rng(&self, replication: u64, role: StreamRole) -> ChaCha8Rng {
        assert!(replication < (1 << 56), "replication index out of range");
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((replication << 8) | role as u64);
        rng
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = SeedStream::new(42);
        let a = s.rng(3, StreamRole::Center).next_u64();
        assert_eq!(a, s.rng(3, StreamRole::Center).next_u64());
        assert_ne!(a, s.rng(4, StreamRole::Center).next_u64());
        assert_ne!(a, s.rng(3, StreamRole::LowerNoise).next_u64());
        assert_ne!(a, SeedStream::new(43).rng(3, StreamRole::Center).next_u64());
    }

    #[test]
    fn derive_is_stable() {
        let s = SeedStream::new(7);
        assert_eq!(s.derive("cell"), s.derive("cell"));
        assert_ne!(s.derive("cell"), s.derive("pilot"));
        // pinned so that changing the hashing rule is a visible break
        assert_eq!(fnv1a(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a(b"a"), 0xaf63_dc4c_8601_ec8c);
    }
}
