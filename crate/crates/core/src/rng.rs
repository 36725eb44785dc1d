//! Seed-addressed random substreams.
//!
//! Every consumer of randomness asks a [`SeedTree`] for a stream keyed by a
//! `(domain, index)` pair. Two different keys never share a ChaCha stream, so the
//! draws of one link or one trial do not depend on how many draws another link
//! made, or on which thread ran first.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Domains for substream keys. The numeric values are part of the reproducibility
/// contract: changing them changes every seeded output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Placement = 1,
    Htd = 2,
    Mtd = 3,
    Trial = 4,
    Policy = 5,
    Diagnostics = 6,
    Drop = 7,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    master: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Stream for `(domain, index)`.
    pub fn stream(&self, domain: Domain, index: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(splitmix64((domain as u64) << 56 ^ splitmix64(index)));
        rng
    }

    /// Stream for a two-level key such as `(link, coherence interval)`.
    pub fn stream2(&self, domain: Domain, outer: u64, inner: u64) -> StreamRng {
        self.stream(domain, splitmix64(outer) ^ inner.rotate_left(29))
    }

    /// An independent tree, e.g. one per sweep point.
    pub fn child(&self, domain: Domain, index: u64) -> SeedTree {
        SeedTree::new(splitmix64(
            self.master ^ splitmix64((domain as u64) << 56 ^ index),
        ))
    }
}
