//! Counter-based seed derivation.
//!
//! Every random quantity in a simulation is drawn from a generator whose seed
//! is `derive(parent, domain, index)`. Results therefore depend only on the
//! master seed and the index of the item, never on scheduling.

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(parent: u64, domain: u64, index: u64) -> u64 {
    mix64(mix64(parent ^ mix64(domain)) ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_children() {
        let a = derive(1, 2, 3);
        assert_eq!(a, derive(1, 2, 3));
        assert_ne!(a, derive(1, 2, 4));
        assert_ne!(a, derive(1, 3, 3));
        assert_ne!(a, derive(2, 2, 3));
    }
}
