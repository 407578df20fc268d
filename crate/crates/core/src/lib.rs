//! Sliding window superposition coding (SWSC) and its bidirectional variant.
//!
//! The crate is `no_std` with `alloc`. It contains everything that is pure
//! computation:
//!
//! * [`ecc`]: LDPC / repetition / identity codes with soft decoding, CRC, alist I/O.
//! * [`superposition`]: two-layer superposed QPSK and its soft demappers.
//! * [`swsc`]: the staircase encoder, the forward chain decoder and the
//!   bidirectional decoder that runs a mirrored chain over the tail packets.
//! * [`baseline`]: stacked LDPC and the tail-concatenated mLDPC baseline.
//! * [`channel`]: AWGN / fading application and 4x4 SVD eigen-channels.
//! * [`analysis`]: the closed-form message error rate model and Wilson intervals.
//!
//! Bit sequences are `Vec<u8>` / `&[u8]` holding 0 or 1 per entry.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod baseline;
pub mod channel;
pub mod ecc;
mod error;
pub mod seed;
pub mod superposition;
pub mod swsc;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Number of packets carried by the tail when a ratio `alpha` of `n_packets`
/// is handled separately: `ceil(alpha * n_packets)`.
///
/// A small guard keeps products such as `0.35 * 20` from rounding up past
/// the exact integer.
pub fn tail_len(alpha: f64, n_packets: usize) -> usize {
    let exact = alpha * n_packets as f64;
    let t = libm::ceil(exact - 1e-9);
    if t <= 0.0 {
        0
    } else {
        (t as usize).min(n_packets)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&alpha) || alpha.is_nan() {
        return Err(Error::InvalidArgument(alloc::format!(
            "alpha must lie in [0, 0.5], got {alpha}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::tail_len;

    #[test]
    fn tail_len_rounds_up() {
        assert_eq!(tail_len(0.0, 20), 0);
        assert_eq!(tail_len(0.2, 20), 4);
        assert_eq!(tail_len(0.35, 20), 7);
        assert_eq!(tail_len(0.5, 20), 10);
        assert_eq!(tail_len(0.5, 1), 1);
        assert_eq!(tail_len(0.5, 3), 2);
        assert_eq!(tail_len(0.2, 1), 1);
    }
}
