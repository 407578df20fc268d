//! End-to-end properties of the chain decoders and the baselines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swsc_core::baseline::BaselineLayout;
use swsc_core::channel::{apply_channel, noise_var_for_snr_db, BlockChannel, Received};
use swsc_core::ecc::{make_ldpc, PacketCoder, CRC16_CCITT};
use swsc_core::superposition::SuperposedBlock;
use swsc_core::swsc::{
    decode_chains, eswsc_decode, eswsc_decode_with_hook, noiseless, swsc_decode, swsc_encode, DecodeParams, Direction,
    KnownBits,
};

fn coder() -> PacketCoder {
    PacketCoder::new(make_ldpc(232, 116, 21).unwrap(), Some(CRC16_CCITT)).unwrap()
}

fn payloads(rng: &mut impl Rng, n: usize, k: usize) -> Vec<Vec<u8>> {
    (0..n).map(|_| (0..k).map(|_| rng.random_range(0..2u8)).collect()).collect()
}

fn awgn(blocks: &[SuperposedBlock], snr_db: f64, rng: &mut impl Rng) -> Vec<Received> {
    let ch = BlockChannel::awgn(noise_var_for_snr_db(snr_db));
    blocks.iter().map(|b| apply_channel(&b.symbols, &ch, rng).unwrap()).collect()
}

#[test]
fn noiseless_round_trip_every_scheme() {
    let coder = coder();
    let params = DecodeParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [1usize, 2, 3, 10, 100] {
        let stacked = BaselineLayout::stacked(coder.clone(), n).unwrap();
        let mldpc = BaselineLayout::mldpc(coder.clone(), n, 0.5, 99).unwrap();
        let sets = if n == 100 { 20 } else { 200 };
        for _ in 0..sets {
            let p = payloads(&mut rng, n, coder.payload_len());
            let frame = swsc_encode(&p, &coder, params.beta, params.clean_seed).unwrap();
            assert_eq!(frame.blocks_sent(), n + 1);
            let rx = noiseless(&frame.blocks);
            assert_eq!(swsc_decode(&rx, &coder, &params).unwrap().packets, p);
            for alpha in [0.2, 0.5] {
                assert_eq!(eswsc_decode(&rx, &coder, &params, alpha).unwrap().packets, p);
            }
            for layout in [&stacked, &mldpc] {
                let blocks = layout.encode(&p, params.beta).unwrap();
                assert_eq!(blocks.len(), n);
                let d = layout.decode(&noiseless(&blocks), &params).unwrap();
                assert_eq!(d.packets, p);
                assert!(d.crc_ok.iter().all(|&c| c));
            }
        }
    }
}

#[test]
fn trace_marks_the_backward_tail() {
    let coder = coder();
    let params = DecodeParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = payloads(&mut rng, 20, coder.payload_len());
    let frame = swsc_encode(&p, &coder, params.beta, params.clean_seed).unwrap();
    let d = eswsc_decode(&noiseless(&frame.blocks), &coder, &params, 0.35).unwrap();
    // ceil(0.35 * 20) = 7 packets decoded backwards
    let dirs: Vec<Direction> = d.trace.iter().map(|s| s.direction).collect();
    assert!(dirs[..13].iter().all(|&x| x == Direction::Forward));
    assert!(dirs[13..].iter().all(|&x| x == Direction::Backward));
}

/// Wrong known bits at one window push errors down the rest of the chain.
#[test]
fn corrupted_known_bits_propagate_forward() {
    let coder = coder();
    let params = DecodeParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 10;
    let j = 4;
    let trials = 1000;
    let mut ok_clean = 0;
    let mut ok_corrupt = 0;
    for _ in 0..trials {
        let p = payloads(&mut rng, n, coder.payload_len());
        let frame = swsc_encode(&p, &coder, params.beta, params.clean_seed).unwrap();
        let rx = awgn(&frame.blocks, 10.0, &mut rng);
        let clean = decode_chains(&rx, &coder, &params, 0, None).unwrap();
        let mut flip_seed = ChaCha8Rng::seed_from_u64(rng.random());
        let mut hook = |kb: KnownBits<'_>| {
            if kb.direction == Direction::Forward && kb.block == j {
                for b in kb.bits.iter_mut() {
                    *b = flip_seed.random_range(0..2u8);
                }
            }
        };
        let corrupt = eswsc_decode_with_hook(&rx, &coder, &params, 0.0, Some(&mut hook)).unwrap();
        // nothing before the corrupted window can change
        assert_eq!(clean.packets[..j], corrupt.packets[..j]);
        ok_clean += (j..n).filter(|&i| clean.packets[i] == p[i]).count();
        ok_corrupt += (j..n).filter(|&i| corrupt.packets[i] == p[i]).count();
    }
    let total = (trials * (n - j)) as f64;
    let (clean_rate, corrupt_rate) = (ok_clean as f64 / total, ok_corrupt as f64 / total);
    assert!(clean_rate > 0.95, "clean success {clean_rate}");
    assert!(corrupt_rate < clean_rate - 0.2, "corrupted {corrupt_rate} vs clean {clean_rate}");
}

#[test]
fn backward_chain_ignores_forward_corruption() {
    let coder = coder();
    let params = DecodeParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let p = payloads(&mut rng, 12, coder.payload_len());
        let frame = swsc_encode(&p, &coder, params.beta, params.clean_seed).unwrap();
        let rx = awgn(&frame.blocks, 9.0, &mut rng);
        let plain = eswsc_decode(&rx, &coder, &params, 0.5).unwrap();
        let mut hook = |kb: KnownBits<'_>| {
            if kb.direction == Direction::Forward {
                kb.bits.iter_mut().for_each(|b| *b ^= 1);
            }
        };
        let hit = eswsc_decode_with_hook(&rx, &coder, &params, 0.5, Some(&mut hook)).unwrap();
        assert_eq!(plain.packets[6..], hit.packets[6..]);
        assert_eq!(plain.trace[6..], hit.trace[6..]);
    }
}

#[test]
fn concatenated_tail_beats_stacked_at_moderate_snr() {
    let coder = coder();
    let params = DecodeParams::default();
    let n = 20;
    let stacked = BaselineLayout::stacked(coder.clone(), n).unwrap();
    let mldpc = BaselineLayout::mldpc(coder.clone(), n, 0.5, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut fail_s, mut fail_m) = (0, 0);
    let trials = 400;
    for _ in 0..trials {
        let p = payloads(&mut rng, n, coder.payload_len());
        let noise_seed: u64 = rng.random();
        for (layout, fails) in [(&stacked, &mut fail_s), (&mldpc, &mut fail_m)] {
            let blocks = layout.encode(&p, params.beta).unwrap();
            let rx = awgn(&blocks, 10.0, &mut ChaCha8Rng::seed_from_u64(noise_seed));
            *fails += usize::from(layout.decode(&rx, &params).unwrap().packets != p);
        }
    }
    assert!(fail_m < fail_s, "mldpc {fail_m} vs stacked {fail_s} failures out of {trials}");
}
