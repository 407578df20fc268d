//! Bit-serial CRC over bit sequences of arbitrary length.

use alloc::vec::Vec;

use crate::{Error, Result};

/// A CRC generator polynomial of degree `width`.
///
/// `poly` holds the coefficients below the leading term, MSB = x^(width-1).
/// The register starts at zero with no final XOR, so the remainder is a linear
/// function of the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crc {
    width: u8,
    poly: u64,
}

/// x^16 + x^12 + x^5 + 1
pub const CRC16_CCITT: Crc = Crc {
    width: 16,
    poly: 0x1021,
};

/// x^24 + x^23 + x^6 + x^5 + x + 1 (the 24-bit "A" generator of LTE/NR).
pub const CRC24A: Crc = Crc {
    width: 24,
    poly: 0x86_4CFB,
};

impl Default for Crc {
    fn default() -> Self {
        CRC16_CCITT
    }
}

impl Crc {
    pub fn new(width: u8, poly: u64) -> Result<Self> {
        if width == 0 || width > 63 {
            return Err(Error::InvalidArgument(alloc::format!(
                "crc width must be in 1..=63, got {width}"
            )));
        }
        if poly >> width != 0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "polynomial {poly:#x} does not fit in {width} bits"
            )));
        }
        Ok(Self { width, poly })
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn remainder(&self, bits: &[u8]) -> u64 {
        let top = 1u64 << (self.width - 1);
        let mask = (top << 1).wrapping_sub(1);
        let mut reg = 0u64;
        for &b in bits {
            let feedback = ((reg & top) != 0) ^ (b & 1 == 1);
            reg = (reg << 1) & mask;
            if feedback {
                reg ^= self.poly;
            }
        }
        reg
    }

    /// Appends the remainder, most significant bit first.
    pub fn attach(&self, bits: &[u8]) -> Result<Vec<u8>> {
        if bits.is_empty() {
            return Err(Error::InvalidArgument("crc input is empty".into()));
        }
        let rem = self.remainder(bits);
        let mut out = Vec::with_capacity(bits.len() + self.width());
        out.extend_from_slice(bits);
        out.extend((0..self.width).rev().map(|i| ((rem >> i) & 1) as u8));
        Ok(out)
    }

    /// True iff the trailing `width` bits are the remainder of the prefix.
    pub fn check(&self, bits: &[u8]) -> bool {
        bits.len() > self.width() && self.remainder(bits) == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
        (0..len).map(|_| rng.random_range(0..2u8)).collect()
    }

    #[test]
    fn attach_then_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = random_bits(&mut rng, 100);
            assert!(CRC16_CCITT.check(&CRC16_CCITT.attach(&x).unwrap()));
            assert!(CRC24A.check(&CRC24A.attach(&x).unwrap()));
        }
    }

    #[test]
    fn single_bit_flip_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_bits(&mut rng, 100);
        let framed = CRC16_CCITT.attach(&x).unwrap();
        for i in 0..framed.len() {
            let mut bad = framed.clone();
            bad[i] ^= 1;
            assert!(!CRC16_CCITT.check(&bad), "flip at {i} went undetected");
        }
    }

    #[test]
    fn zero_input_zero_remainder() {
        let framed = CRC16_CCITT.attach(&[0u8; 37]).unwrap();
        assert!(framed[37..].iter().all(|&b| b == 0));
    }

    #[test]
    fn known_check_value() {
        // CRC-16/XMODEM("123456789") = 0x31C3
        let bits: Vec<u8> = b"123456789"
            .iter()
            .flat_map(|&byte| (0..8).rev().map(move |i| (byte >> i) & 1))
            .collect();
        assert_eq!(CRC16_CCITT.remainder(&bits), 0x31C3);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Crc::new(0, 0).is_err());
        assert!(Crc::new(8, 0x1ff).is_err());
        assert!(CRC16_CCITT.attach(&[]).is_err());
    }
}
