//! Error-correcting codes used for the `a_i -> b_i` packet encoding step.

mod alist;
mod crc;
mod ldpc;

use alloc::format;
use alloc::vec::Vec;

pub use alist::{from_alist, to_alist};
pub use crc::{Crc, CRC16_CCITT, CRC24A};
pub use ldpc::{ParityCheck, MIN_SUM_SCALE};

use crate::error::expect_len;
use crate::{Error, Result};

use ldpc::LdpcCode;

/// Magnitude at which every LLR is saturated.
pub const LLR_CAP: f64 = 30.0;

/// Default number of min-sum iterations.
pub const DEFAULT_MAX_ITERS: usize = 25;

/// Per-bit log-likelihood ratios, `ln P(b=0)/P(b=1)`: positive favours 0.
///
/// Entries are clamped to `±cap` on construction and NaN becomes 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self::with_cap(values, LLR_CAP)
    }

    pub fn with_cap(mut values: Vec<f64>, cap: f64) -> Self {
        for v in &mut values {
            *v = if v.is_nan() { 0.0 } else { v.clamp(-cap, cap) };
        }
        Self(values)
    }

    /// Perfectly reliable LLRs for a known bit sequence.
    pub fn from_bits(bits: &[u8], magnitude: f64) -> Self {
        Self::new(
            bits.iter()
                .map(|&b| if b == 0 { magnitude } else { -magnitude })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn hard_decision(&self) -> Vec<u8> {
        self.0.iter().map(|&l| u8::from(l < 0.0)).collect()
    }

    /// `self || other`
    pub fn concat(mut self, other: &LlrVector) -> Self {
        self.0.extend_from_slice(&other.0);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeKind {
    Ldpc,
    Repetition,
    Identity,
}

#[derive(Debug, Clone)]
enum Inner {
    Ldpc(LdpcCode),
    Repetition { factor: usize },
    Identity,
}

/// A binary linear block code of dimension `k` and length `n`.
///
/// Immutable once built; decoding allocates its own working memory so a code
/// can be shared between threads.
#[derive(Debug, Clone)]
pub struct EccCode {
    k: usize,
    n: usize,
    seed: u64,
    inner: Inner,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoftDecision {
    pub info: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

/// Seeded LDPC code of length `n` (even) and dimension `k`.
pub fn make_ldpc(n: usize, k: usize, seed: u64) -> Result<EccCode> {
    EccCode::ldpc(n, k, seed)
}

impl EccCode {
    pub fn ldpc(n: usize, k: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            k,
            n,
            seed,
            inner: Inner::Ldpc(LdpcCode::generate(n, k, seed)?),
        })
    }

    /// LDPC code defined by an explicit full-rank parity-check matrix.
    pub fn from_parity_check(h: ParityCheck) -> Result<Self> {
        let n = h.n();
        let k = n - h.m().min(n);
        Ok(Self {
            k,
            n,
            seed: 0,
            inner: Inner::Ldpc(LdpcCode::from_parity_check(h)?),
        })
    }

    /// Each info bit repeated `n / k` times in place: `10 -> 1100` at rate 1/2.
    pub fn repetition(k: usize, n: usize) -> Result<Self> {
        if k == 0 || n <= k || !n.is_multiple_of(k) {
            return Err(Error::Construction(format!(
                "repetition needs n a multiple of k with n > k > 0, got k={k}, n={n}"
            )));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::Construction(format!(
                "codeword length n={n} must be even"
            )));
        }
        Ok(Self {
            k,
            n,
            seed: 0,
            inner: Inner::Repetition { factor: n / k },
        })
    }

    /// Uncoded transmission, `n = k`.
    pub fn identity(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Construction("identity code needs k > 0".into()));
        }
        Ok(Self {
            k,
            n: k,
            seed: 0,
            inner: Inner::Identity,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn construction_seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> CodeKind {
        match self.inner {
            Inner::Ldpc(_) => CodeKind::Ldpc,
            Inner::Repetition { .. } => CodeKind::Repetition,
            Inner::Identity => CodeKind::Identity,
        }
    }

    pub fn parity_check(&self) -> Option<&ParityCheck> {
        match &self.inner {
            Inner::Ldpc(code) => Some(code.parity_check()),
            _ => None,
        }
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        expect_len("info bits", self.k, info.len())?;
        Ok(match &self.inner {
            Inner::Ldpc(code) => code.encode(info),
            Inner::Repetition { factor } => info
                .iter()
                .flat_map(|&b| core::iter::repeat_n(b, *factor))
                .collect(),
            Inner::Identity => info.to_vec(),
        })
    }

    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        if bits.len() != self.n {
            return false;
        }
        match &self.inner {
            Inner::Ldpc(code) => code.parity_check().syndrome_ok(bits),
            Inner::Repetition { factor } => bits
                .chunks(*factor)
                .all(|c| c.iter().all(|&b| b == c[0])),
            Inner::Identity => true,
        }
    }

    /// Soft-input decoding. LDPC codes run normalized min-sum and report
    /// convergence when every check is satisfied; repetition and identity
    /// codes take the exact ML decision and always report convergence.
    pub fn decode_soft(&self, llrs: &LlrVector, max_iters: usize) -> Result<SoftDecision> {
        expect_len("llrs", self.n, llrs.len())?;
        if max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        let l = llrs.as_slice();
        Ok(match &self.inner {
            Inner::Ldpc(code) => {
                let (hard, converged, iterations) = code.min_sum(l, max_iters);
                let mut info = Vec::with_capacity(self.k);
                code.extract_info(&hard, &mut info);
                SoftDecision {
                    info,
                    converged,
                    iterations,
                }
            }
            Inner::Repetition { factor } => SoftDecision {
                info: l
                    .chunks(*factor)
                    .map(|c| u8::from(c.iter().sum::<f64>() < 0.0))
                    .collect(),
                converged: true,
                iterations: 0,
            },
            Inner::Identity => SoftDecision {
                info: llrs.hard_decision(),
                converged: true,
                iterations: 0,
            },
        })
    }
}

/// Packet-level coding: optional CRC attachment followed by the block code.
#[derive(Debug, Clone)]
pub struct PacketCoder {
    code: EccCode,
    crc: Option<Crc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketDecision {
    pub payload: Vec<u8>,
    pub converged: bool,
    /// CRC verdict, or the decoder's convergence flag when no CRC is attached.
    pub crc_ok: bool,
}

impl PacketCoder {
    pub fn new(code: EccCode, crc: Option<Crc>) -> Result<Self> {
        if let Some(c) = crc {
            if code.k() <= c.width() {
                return Err(Error::InvalidArgument(format!(
                    "code dimension {} leaves no room for a {}-bit crc",
                    code.k(),
                    c.width()
                )));
            }
        }
        Ok(Self { code, crc })
    }

    pub fn code(&self) -> &EccCode {
        &self.code
    }

    pub fn crc(&self) -> Option<Crc> {
        self.crc
    }

    pub fn payload_len(&self) -> usize {
        self.code.k() - self.crc.map_or(0, |c| c.width())
    }

    /// Payload with its CRC appended (the code's info word).
    pub fn frame(&self, payload: &[u8]) -> Result<Vec<u8>> {
        expect_len("packet payload", self.payload_len(), payload.len())?;
        match self.crc {
            Some(c) => c.attach(payload),
            None => Ok(payload.to_vec()),
        }
    }

    pub fn encode(&self, payload: &[u8]) -> Result<Vec<u8>> {
        self.code.encode(&self.frame(payload)?)
    }

    /// Splits a decoded info word back into payload and CRC verdict.
    pub fn unframe(&self, info: &[u8], converged: bool) -> PacketDecision {
        let payload = info[..self.payload_len()].to_vec();
        let crc_ok = match self.crc {
            Some(c) => c.check(info),
            None => converged,
        };
        PacketDecision {
            payload,
            converged,
            crc_ok,
        }
    }

    pub fn decode(&self, llrs: &LlrVector, max_iters: usize) -> Result<(PacketDecision, Vec<u8>)> {
        let soft = self.code.decode_soft(llrs, max_iters)?;
        let decision = self.unframe(&soft.info, soft.converged);
        Ok((decision, soft.info))
    }
}
