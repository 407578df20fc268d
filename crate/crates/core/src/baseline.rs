//! LDPC baselines without the sliding-window offset.
//!
//! In the stacked baseline packet `i`'s codeword fills both layers of block
//! `i` (first half on layer 1, second half on layer 2). Neither layer is ever
//! known, so both are demapped jointly. mLDPC keeps the first `N - B` packets
//! stacked and encodes the last `B = ceil(alpha * N)` CRC-framed packets as a
//! single codeword of `B` times the length, spread over the last `B` blocks in
//! the same way.

use alloc::format;
use alloc::vec::Vec;

use crate::channel::Received;
use crate::ecc::{make_ldpc, EccCode, LlrVector, PacketCoder};
use crate::error::expect_len;
use crate::superposition::{check_beta, demod_joint, modulate_superposed, SuperposedBlock};
use crate::swsc::{ChainStep, DecodeParams, DecodeResult, Direction};
use crate::{check_alpha, tail_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineScheme {
    LdpcStacked,
    Mldpc,
}

/// Upper bound on the baseline code rate so that `N` baseline blocks carry at
/// least as many coded bits as the `N + 1` SWSC blocks: `r * N / (N + 1)`.
pub fn compensated_rate_bound(swsc_rate: f64, n_packets: usize) -> f64 {
    swsc_rate * n_packets as f64 / (n_packets as f64 + 1.0)
}

/// Smallest multiple of 4 that is at least `swsc_n * (N + 1) / N`, i.e. the
/// shortest baseline codeword (same info length) meeting the bound above.
pub fn compensated_codeword_len(swsc_n: usize, n_packets: usize) -> usize {
    let need = (swsc_n * (n_packets + 1)).div_ceil(n_packets);
    need.div_ceil(4) * 4
}

/// Exact check of `N * n_baseline >= (N + 1) * n_swsc`.
pub fn rate_compensated(baseline_n: usize, swsc_n: usize, n_packets: usize) -> bool {
    n_packets * baseline_n >= (n_packets + 1) * swsc_n
}

/// Codes and geometry of one baseline configuration.
#[derive(Debug, Clone)]
pub struct BaselineLayout {
    pub scheme: BaselineScheme,
    pub per_packet: PacketCoder,
    pub tail_code: Option<EccCode>,
    pub alpha: f64,
    pub packet_count: usize,
}

impl BaselineLayout {
    pub fn stacked(per_packet: PacketCoder, packet_count: usize) -> Result<Self> {
        let layout = Self {
            scheme: BaselineScheme::LdpcStacked,
            per_packet,
            tail_code: None,
            alpha: 0.0,
            packet_count,
        };
        layout.validate()?;
        Ok(layout)
    }

    /// mLDPC layout with a freshly generated tail code.
    pub fn mldpc(per_packet: PacketCoder, packet_count: usize, alpha: f64, tail_seed: u64) -> Result<Self> {
        check_alpha(alpha)?;
        let b = tail_len(alpha, packet_count);
        let tail_code = if b == 0 {
            None
        } else {
            let code = per_packet.code();
            Some(make_ldpc(b * code.n(), b * code.k(), tail_seed)?)
        };
        let layout = Self {
            scheme: BaselineScheme::Mldpc,
            per_packet,
            tail_code,
            alpha,
            packet_count,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn tail_packets(&self) -> usize {
        match self.scheme {
            BaselineScheme::LdpcStacked => 0,
            BaselineScheme::Mldpc => tail_len(self.alpha, self.packet_count),
        }
    }

    pub fn block_count(&self) -> usize {
        self.packet_count
    }

    fn validate(&self) -> Result<()> {
        if self.packet_count == 0 {
            return Err(Error::InvalidArgument("at least one packet is required".into()));
        }
        let n = self.per_packet.code().n();
        if !n.is_multiple_of(4) {
            return Err(Error::InvalidArgument(format!(
                "codeword length {n} must be a multiple of 4"
            )));
        }
        check_tail(&self.per_packet, self.tail_code.as_ref(), self.tail_packets())
    }

    pub fn encode(&self, packets: &[Vec<u8>], beta: f64) -> Result<Vec<SuperposedBlock>> {
        expect_len("packet count", self.packet_count, packets.len())?;
        match self.scheme {
            BaselineScheme::LdpcStacked => ldpc_stacked_encode(packets, &self.per_packet, beta),
            BaselineScheme::Mldpc => {
                mldpc_encode(packets, &self.per_packet, self.tail_code.as_ref(), self.alpha, beta)
            }
        }
    }

    pub fn decode(&self, received: &[Received], params: &DecodeParams) -> Result<DecodeResult> {
        expect_len("received block count", self.packet_count, received.len())?;
        match self.scheme {
            BaselineScheme::LdpcStacked => ldpc_stacked_decode(received, &self.per_packet, params),
            BaselineScheme::Mldpc => {
                mldpc_decode(received, &self.per_packet, self.tail_code.as_ref(), self.alpha, params)
            }
        }
    }
}

fn check_tail(per_packet: &PacketCoder, tail: Option<&EccCode>, b: usize) -> Result<()> {
    match (b, tail) {
        (0, _) => Ok(()),
        (_, None) => Err(Error::InvalidArgument(format!(
            "{b} tail packets need a tail code"
        ))),
        (_, Some(t)) => {
            let code = per_packet.code();
            if t.k() != b * code.k() || t.n() != b * code.n() {
                return Err(Error::InvalidArgument(format!(
                    "tail code is ({}, {}), expected ({}, {}) for {b} packets",
                    t.n(),
                    t.k(),
                    b * code.n(),
                    b * code.k()
                )));
            }
            Ok(())
        }
    }
}

/// Splits a codeword across both layers of consecutive blocks.
fn stack_codeword(codeword: &[u8], per_block: usize, beta: f64, out: &mut Vec<SuperposedBlock>) -> Result<()> {
    for chunk in codeword.chunks_exact(per_block) {
        let (l1, l2) = chunk.split_at(per_block / 2);
        out.push(modulate_superposed(l1, l2, beta)?);
    }
    Ok(())
}

fn joint_llrs(rx: &Received, params: &DecodeParams) -> Result<LlrVector> {
    let (l1, l2) = demod_joint(&rx.symbols, params.beta, &rx.noise_var, params.demap)?;
    Ok(l1.concat(&l2))
}

fn check_blocks(received: &[Received], n: usize) -> Result<()> {
    if received.is_empty() {
        return Err(Error::InvalidArgument("no received blocks".into()));
    }
    for rx in received {
        expect_len("received symbols per block", n / 4, rx.symbols.len())?;
        expect_len("noise variances per block", n / 4, rx.noise_var.len())?;
    }
    Ok(())
}

pub fn ldpc_stacked_encode(packets: &[Vec<u8>], coder: &PacketCoder, beta: f64) -> Result<Vec<SuperposedBlock>> {
    mldpc_encode(packets, coder, None, 0.0, beta)
}

pub fn ldpc_stacked_decode(received: &[Received], coder: &PacketCoder, params: &DecodeParams) -> Result<DecodeResult> {
    mldpc_decode(received, coder, None, 0.0, params)
}

pub fn mldpc_encode(
    packets: &[Vec<u8>],
    per_packet: &PacketCoder,
    tail: Option<&EccCode>,
    alpha: f64,
    beta: f64,
) -> Result<Vec<SuperposedBlock>> {
    check_alpha(alpha)?;
    check_beta(beta)?;
    if packets.is_empty() {
        return Err(Error::InvalidArgument("at least one packet is required".into()));
    }
    let n = per_packet.code().n();
    if !n.is_multiple_of(4) {
        return Err(Error::InvalidArgument(format!("codeword length {n} must be a multiple of 4")));
    }
    let b = tail_len(alpha, packets.len());
    check_tail(per_packet, tail, b)?;
    let head = packets.len() - b;
    let mut blocks = Vec::with_capacity(packets.len());
    for p in &packets[..head] {
        stack_codeword(&per_packet.encode(p)?, n, beta, &mut blocks)?;
    }
    if let Some(t) = tail.filter(|_| b > 0) {
        let mut info = Vec::with_capacity(t.k());
        for p in &packets[head..] {
            info.extend(per_packet.frame(p)?);
        }
        stack_codeword(&t.encode(&info)?, n, beta, &mut blocks)?;
    }
    Ok(blocks)
}

pub fn mldpc_decode(
    received: &[Received],
    per_packet: &PacketCoder,
    tail: Option<&EccCode>,
    alpha: f64,
    params: &DecodeParams,
) -> Result<DecodeResult> {
    check_alpha(alpha)?;
    check_beta(params.beta)?;
    let n = per_packet.code().n();
    check_blocks(received, n)?;
    let count = received.len();
    let b = tail_len(alpha, count);
    check_tail(per_packet, tail, b)?;
    let head = count - b;
    let mut packets = Vec::with_capacity(count);
    let mut crc_ok = Vec::with_capacity(count);
    let mut trace = Vec::with_capacity(count);
    for rx in &received[..head] {
        let (d, _) = per_packet.decode(&joint_llrs(rx, params)?, params.max_iters)?;
        packets.push(d.payload);
        crc_ok.push(d.crc_ok);
        trace.push(ChainStep {
            direction: Direction::Stacked,
            converged: d.converged,
        });
    }
    if let Some(t) = tail.filter(|_| b > 0) {
        let mut llrs = LlrVector::default();
        for rx in &received[head..] {
            llrs = llrs.concat(&joint_llrs(rx, params)?);
        }
        let soft = t.decode_soft(&llrs, params.max_iters)?;
        for framed in soft.info.chunks_exact(per_packet.code().k()) {
            let d = per_packet.unframe(framed, soft.converged);
            packets.push(d.payload);
            crc_ok.push(d.crc_ok);
            trace.push(ChainStep {
                direction: Direction::Concatenated,
                converged: soft.converged,
            });
        }
    }
    Ok(DecodeResult {
        packets,
        crc_ok,
        trace,
        blocks_sent: count,
    })
}
