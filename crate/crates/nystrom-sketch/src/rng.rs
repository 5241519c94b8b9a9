//! Deterministic seed derivation and random substreams.
//!
//! Every randomly drawn object gets its own ChaCha substream keyed by a
//! SplitMix64-style hash of (seed, tags). Draw order therefore never leaks
//! between objects, and reordering a sweep cannot change any single draw.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a base seed with a sequence of tag words into a new 64-bit seed.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut h = mix(base.wrapping_add(GOLDEN));
    for &t in tags {
        h = mix(h ^ t.wrapping_mul(GOLDEN).wrapping_add(GOLDEN));
    }
    h
}

/// Counter-based generator for one derived substream.
pub fn substream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tags))
}

/// Stable tag for a short ASCII label.
pub fn tag(label: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derive_is_deterministic() {
        assert_eq!(derive_seed(1, &[2, 3]), derive_seed(1, &[2, 3]));
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
        assert_ne!(derive_seed(1, &[2]), derive_seed(2, &[2]));
    }

    #[test]
    fn substreams_reproduce() {
        let mut a = substream(7, &[tag("payload")]);
        let mut b = substream(7, &[tag("payload")]);
        for _ in 0..16 {
            assert_eq!(a.gen::<u64>(), b.gen::<u64>());
        }
    }

    #[test]
    fn substreams_differ_by_tag() {
        let mut a = substream(7, &[tag("payload")]);
        let mut b = substream(7, &[tag("perm")]);
        assert_ne!(a.gen::<u64>(), b.gen::<u64>());
    }
}
