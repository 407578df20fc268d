//! SWSC staircase encoder and the chain decoders.
//!
//! Packet `i` (0-based here) is encoded to `b_i = c_i1 || c_i2`. With `N`
//! packets, `N + 1` blocks are sent and the two layers of each block hold:
//!
//! ```text
//! block:     0       1       2      ...     N
//! layer 1:   clean   c_02    c_12   ...   c_(N-1)2
//! layer 2:   c_01    c_11    c_21   ...   clean
//! ```
//!
//! The forward chain decodes packet `i` from layer 2 of block `i` (with layer
//! 1 known, either the clean head or the re-encoded `c_(i-1)2`) and layer 1 of
//! block `i + 1` (other layer unknown). The backward chain mirrors this from
//! the clean tail: layer 1 of block `i + 1` with layer 2 known, and layer 2 of
//! block `i` with the other layer unknown.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::Received;
use crate::ecc::{PacketCoder, DEFAULT_MAX_ITERS};
use crate::error::expect_len;
use crate::superposition::{
    check_beta, demod_tin, demod_with_known, modulate_superposed, DemapMode, Layer, SuperposedBlock,
    DEFAULT_BETA,
};
use crate::{check_alpha, tail_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Half {
    First,
    Second,
}

/// Content of one layer slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Clean,
    Half { packet: usize, half: Half },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockLayout {
    pub layer1: Slot,
    pub layer2: Slot,
}

/// Staircase placement for `n_packets` packets over `n_packets + 1` blocks.
pub fn swsc_layout(n_packets: usize) -> Vec<BlockLayout> {
    (0..=n_packets)
        .map(|b| BlockLayout {
            layer1: if b == 0 {
                Slot::Clean
            } else {
                Slot::Half {
                    packet: b - 1,
                    half: Half::Second,
                }
            },
            layer2: if b == n_packets {
                Slot::Clean
            } else {
                Slot::Half {
                    packet: b,
                    half: Half::First,
                }
            },
        })
        .collect()
}

/// Known head (block 0, layer 1) and tail (block N, layer 2) sequences.
pub fn clean_sequences(seed: u64, half_len: usize) -> (Vec<u8>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let head = (0..half_len).map(|_| rng.random_range(0..2u8)).collect();
    let tail = (0..half_len).map(|_| rng.random_range(0..2u8)).collect();
    (head, tail)
}

/// Output of the encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub blocks: Vec<SuperposedBlock>,
    /// Transmitted bits of each block, `[layer1, layer2]`.
    pub layers: Vec<[Vec<u8>; 2]>,
    pub layout: Vec<BlockLayout>,
    pub clean_head: Vec<u8>,
    pub clean_tail: Vec<u8>,
    pub packet_count: usize,
}

impl FrameSequence {
    pub fn blocks_sent(&self) -> usize {
        self.blocks.len()
    }
}

fn half_len(coder: &PacketCoder) -> Result<usize> {
    let n = coder.code().n();
    if !n.is_multiple_of(4) {
        return Err(Error::InvalidArgument(alloc::format!(
            "codeword length {n} must be a multiple of 4 so each half fills whole QPSK symbols"
        )));
    }
    Ok(n / 2)
}

pub fn swsc_encode(packets: &[Vec<u8>], coder: &PacketCoder, beta: f64, clean_seed: u64) -> Result<FrameSequence> {
    check_beta(beta)?;
    if packets.is_empty() {
        return Err(Error::InvalidArgument("at least one packet is required".into()));
    }
    let half = half_len(coder)?;
    let codewords = packets
        .iter()
        .map(|p| coder.encode(p))
        .collect::<Result<Vec<_>>>()?;
    let (clean_head, clean_tail) = clean_sequences(clean_seed, half);
    let layout = swsc_layout(packets.len());
    let slot_bits = |slot: Slot| -> &[u8] {
        match slot {
            Slot::Clean => unreachable!(),
            Slot::Half { packet, half: h } => match h {
                Half::First => &codewords[packet][..half],
                Half::Second => &codewords[packet][half..],
            },
        }
    };
    let mut layers = Vec::with_capacity(layout.len());
    let mut blocks = Vec::with_capacity(layout.len());
    for (b, l) in layout.iter().enumerate() {
        let l1 = if b == 0 { clean_head.clone() } else { slot_bits(l.layer1).to_vec() };
        let l2 = if b == packets.len() { clean_tail.clone() } else { slot_bits(l.layer2).to_vec() };
        blocks.push(modulate_superposed(&l1, &l2, beta)?);
        layers.push([l1, l2]);
    }
    Ok(FrameSequence {
        blocks,
        layers,
        layout,
        clean_head,
        clean_tail,
        packet_count: packets.len(),
    })
}

/// Decoder settings shared by the chain decoders and the baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeParams {
    pub beta: f64,
    pub clean_seed: u64,
    pub max_iters: usize,
    pub demap: DemapMode,
}

impl Default for DecodeParams {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            clean_seed: 0,
            max_iters: DEFAULT_MAX_ITERS,
            demap: DemapMode::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
    /// Baseline packet decoded on its own.
    Stacked,
    /// Baseline packet decoded as part of the concatenated tail codeword.
    Concatenated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainStep {
    pub direction: Direction,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub packets: Vec<Vec<u8>>,
    pub crc_ok: Vec<bool>,
    pub trace: Vec<ChainStep>,
    pub blocks_sent: usize,
}

/// Known-layer bits handed to a decoding hook right before they are used to
/// demodulate `block`. Mutating `bits` emulates a wrong earlier decision.
#[derive(Debug)]
pub struct KnownBits<'a> {
    pub direction: Direction,
    pub block: usize,
    pub layer: Layer,
    pub bits: &'a mut [u8],
}

pub type KnownBitsHook<'h> = &'h mut dyn FnMut(KnownBits<'_>);

fn check_received(received: &[Received], half: usize) -> Result<usize> {
    if received.len() < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "need at least 2 received blocks, got {}",
            received.len()
        )));
    }
    for rx in received {
        expect_len("received symbols per block", half / 2, rx.symbols.len())?;
        expect_len("noise variances per block", half / 2, rx.noise_var.len())?;
    }
    Ok(received.len() - 1)
}

/// Forward sliding-window decoding of all `N` packets.
pub fn swsc_decode(received: &[Received], coder: &PacketCoder, params: &DecodeParams) -> Result<DecodeResult> {
    decode_chains(received, coder, params, 0, None)
}

/// Bidirectional decoding: the last `ceil(alpha * N)` packets are decoded by
/// the backward chain anchored on the clean tail.
pub fn eswsc_decode(
    received: &[Received],
    coder: &PacketCoder,
    params: &DecodeParams,
    alpha: f64,
) -> Result<DecodeResult> {
    eswsc_decode_with_hook(received, coder, params, alpha, None)
}

pub fn eswsc_decode_with_hook(
    received: &[Received],
    coder: &PacketCoder,
    params: &DecodeParams,
    alpha: f64,
    hook: Option<KnownBitsHook<'_>>,
) -> Result<DecodeResult> {
    check_alpha(alpha)?;
    let half = half_len(coder)?;
    let n = check_received(received, half)?;
    decode_chains(received, coder, params, tail_len(alpha, n), hook)
}

/// Forward chain over packets `0..N-backward`, backward chain over the rest.
/// The chains share no state.
pub fn decode_chains(
    received: &[Received],
    coder: &PacketCoder,
    params: &DecodeParams,
    backward: usize,
    mut hook: Option<KnownBitsHook<'_>>,
) -> Result<DecodeResult> {
    check_beta(params.beta)?;
    let half = half_len(coder)?;
    let n = check_received(received, half)?;
    if backward > n {
        return Err(Error::InvalidArgument(alloc::format!(
            "backward chain length {backward} exceeds packet count {n}"
        )));
    }
    let forward = n - backward;
    let (head, tail) = clean_sequences(params.clean_seed, half);
    let mut packets = alloc::vec![Vec::new(); n];
    let mut crc_ok = alloc::vec![false; n];
    let mut trace = alloc::vec![
        ChainStep {
            direction: Direction::Forward,
            converged: false
        };
        n
    ];

    let mut known = head;
    for i in 0..forward {
        if let Some(h) = hook.as_mut() {
            h(KnownBits {
                direction: Direction::Forward,
                block: i,
                layer: Layer::One,
                bits: &mut known,
            });
        }
        let first = demod_with_known(
            &received[i].symbols,
            Layer::One,
            &known,
            params.beta,
            &received[i].noise_var,
        )?;
        let second = demod_tin(
            &received[i + 1].symbols,
            Layer::One,
            params.beta,
            &received[i + 1].noise_var,
            params.demap,
        )?;
        let (decision, info) = coder.decode(&first.concat(&second), params.max_iters)?;
        let reencoded = coder.code().encode(&info)?;
        known = reencoded[half..].to_vec();
        packets[i] = decision.payload;
        crc_ok[i] = decision.crc_ok;
        trace[i] = ChainStep {
            direction: Direction::Forward,
            converged: decision.converged,
        };
    }

    let mut known = tail;
    for i in (forward..n).rev() {
        if let Some(h) = hook.as_mut() {
            h(KnownBits {
                direction: Direction::Backward,
                block: i + 1,
                layer: Layer::Two,
                bits: &mut known,
            });
        }
        let second = demod_with_known(
            &received[i + 1].symbols,
            Layer::Two,
            &known,
            params.beta,
            &received[i + 1].noise_var,
        )?;
        let first = demod_tin(
            &received[i].symbols,
            Layer::Two,
            params.beta,
            &received[i].noise_var,
            params.demap,
        )?;
        let (decision, info) = coder.decode(&first.concat(&second), params.max_iters)?;
        let reencoded = coder.code().encode(&info)?;
        known = reencoded[..half].to_vec();
        packets[i] = decision.payload;
        crc_ok[i] = decision.crc_ok;
        trace[i] = ChainStep {
            direction: Direction::Backward,
            converged: decision.converged,
        };
    }

    Ok(DecodeResult {
        packets,
        crc_ok,
        trace,
        blocks_sent: n + 1,
    })
}

/// Noise-free observation of a frame, for round-trip checks.
pub fn noiseless(frame_blocks: &[SuperposedBlock]) -> Vec<Received> {
    frame_blocks
        .iter()
        .map(|b| Received::clean(&b.symbols, 0.0))
        .collect()
}
