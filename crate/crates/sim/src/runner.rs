//! Seeded, parallel end-to-end trials.

use std::time::Instant;

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use swsc_core::analysis::{self, MerEstimate};
use swsc_core::baseline::BaselineLayout;
use swsc_core::channel::{
    apply_channel_with_noise, noise_var_for_snr_db, standard_complex_normal, unit_noise, BlockChannel,
    BlockGain, Received, MIN_NOISE_VAR,
};
use swsc_core::ecc::{make_ldpc, PacketCoder, CRC16_CCITT};
use swsc_core::seed::{derive, mix64};
use swsc_core::superposition::SuperposedBlock;
use swsc_core::swsc::{eswsc_decode, swsc_decode, swsc_encode, DecodeParams, DecodeResult, Direction};
use swsc_core::Complex64;

use crate::channel_file::{load_channel_file, ChannelFile};
use crate::config::{ChannelSpec, ExperimentConfig, Scheme};
use crate::{Error, Result};

// seed derivation domains
const TRIAL: u64 = 1;
const SCHEME: u64 = 2;
const CODE: u64 = 3;
const CLEAN: u64 = 4;
const PAYLOAD: u64 = 5;
const NOISE: u64 = 6;
const GAIN: u64 = 7;
const RECEIVERS: u64 = 8;

/// Everything a trial needs that does not change between trials.
#[derive(Debug)]
pub struct LinkSetup {
    pub config: ExperimentConfig,
    pub swsc_coder: PacketCoder,
    pub stacked: BaselineLayout,
    pub mldpc: BaselineLayout,
    pub params: DecodeParams,
    pub noise_var: f64,
    pub channel_file: Option<ChannelFile>,
}

impl LinkSetup {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let seed = config.master_seed;
        let crc = config.crc.then_some(CRC16_CCITT);
        let k = config.info_len();
        let swsc_coder = PacketCoder::new(make_ldpc(config.swsc_codeword_len(), k, derive(seed, CODE, 0))?, crc)?;
        let base_coder = PacketCoder::new(make_ldpc(config.baseline_codeword_len(), k, derive(seed, CODE, 1))?, crc)?;
        let stacked = BaselineLayout::stacked(base_coder.clone(), config.n_packets)?;
        let mldpc = BaselineLayout::mldpc(base_coder, config.n_packets, config.alpha, derive(seed, CODE, 2))?;
        let channel_file = match &config.channel {
            ChannelSpec::File(path) => {
                let f = load_channel_file(path)?;
                if f.len() < config.n_packets {
                    return Err(Error::Config(format!(
                        "{} packets need {} receivers but {} lists only {}",
                        config.n_packets,
                        config.n_packets,
                        path.display(),
                        f.len()
                    )));
                }
                Some(f)
            }
            _ => None,
        };
        let noise_var = match config.channel {
            ChannelSpec::Noiseless => MIN_NOISE_VAR,
            _ => noise_var_for_snr_db(config.snr_db),
        };
        Ok(Self {
            params: DecodeParams {
                beta: config.beta,
                clean_seed: derive(seed, CLEAN, 0),
                max_iters: config.max_iters,
                demap: config.demapper.into(),
            },
            config: config.clone(),
            swsc_coder,
            stacked,
            mldpc,
            noise_var,
            channel_file,
        })
    }

    fn block_len(&self, scheme: Scheme) -> usize {
        match scheme {
            Scheme::Swsc | Scheme::Eswsc => self.swsc_coder.code().n() / 4,
            Scheme::LdpcStacked | Scheme::Mldpc => self.stacked.per_packet.code().n() / 4,
        }
    }
}

/// Success bookkeeping along decoding chains.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChainCounts {
    /// Packets decoded first in their chain, and how many of them succeeded.
    pub starts: u64,
    pub start_ok: u64,
    /// Packets whose chain predecessor succeeded, and how many of them did too.
    pub conditioned: u64,
    pub conditioned_ok: u64,
}

impl ChainCounts {
    fn add(&mut self, o: &ChainCounts) {
        self.starts += o.starts;
        self.start_ok += o.start_ok;
        self.conditioned += o.conditioned;
        self.conditioned_ok += o.conditioned_ok;
    }

    pub fn p_clean(&self) -> Option<f64> {
        (self.starts > 0).then(|| self.start_ok as f64 / self.starts as f64)
    }

    pub fn p_assumed(&self) -> Option<f64> {
        (self.conditioned > 0).then(|| self.conditioned_ok as f64 / self.conditioned as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub success: bool,
    pub packet_errors: u64,
    /// `[forward, backward]`; baseline packets count as one-packet forward chains.
    pub chains: [ChainCounts; 2],
    pub blocks_sent: usize,
    pub noise_digest: u64,
}

fn trial_seed(cfg: &ExperimentConfig, scheme: Scheme, trial: u64) -> u64 {
    let s = derive(cfg.master_seed, TRIAL, trial);
    if cfg.pair_noise {
        s
    } else {
        derive(s, SCHEME, scheme.tag())
    }
}

pub fn random_payloads(seed: u64, n: usize, k: usize) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, PAYLOAD, 0));
    (0..n).map(|_| (0..k).map(|_| rng.random_range(0..2u8)).collect()).collect()
}

fn block_channels(setup: &LinkSetup, seed: u64, blocks: usize) -> Result<Vec<BlockChannel>> {
    let cfg = &setup.config;
    let nv = setup.noise_var;
    let n = cfg.n_packets;
    Ok(match &cfg.channel {
        ChannelSpec::Awgn | ChannelSpec::Noiseless => vec![BlockChannel::awgn(nv); blocks],
        ChannelSpec::Rayleigh => (0..blocks)
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, GAIN, b as u64));
                BlockChannel {
                    gain: BlockGain::Scalar(standard_complex_normal(&mut rng)),
                    noise_var: nv,
                }
            })
            .collect(),
        ChannelSpec::File(_) => {
            let file = setup.channel_file.as_ref().expect("channel file loaded at setup");
            let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, RECEIVERS, 0));
            let rx = file.draw(n, &mut rng)?;
            // the extra chain block is heard through the last packet's receiver
            (0..blocks)
                .map(|b| file.receivers[rx[b.min(n - 1)]].channel.block_channel(nv))
                .collect()
        }
    })
}

fn transmit(setup: &LinkSetup, scheme: Scheme, seed: u64, blocks: &[SuperposedBlock]) -> Result<(Vec<Received>, u64)> {
    let channels = block_channels(setup, seed, blocks.len())?;
    let digest_len = setup.block_len(Scheme::Swsc);
    let noiseless = setup.config.channel == ChannelSpec::Noiseless;
    let mut digest = 0u64;
    let mut received = Vec::with_capacity(blocks.len());
    for (b, (block, ch)) in blocks.iter().zip(&channels).enumerate() {
        let len = block.symbols.len();
        debug_assert_eq!(len, setup.block_len(scheme));
        let noise = if noiseless {
            vec![Complex64::new(0.0, 0.0); len]
        } else {
            unit_noise(&mut ChaCha8Rng::seed_from_u64(derive(seed, NOISE, b as u64)), len)
        };
        if b < setup.config.n_packets {
            for z in &noise[..digest_len.min(len)] {
                digest = mix64(digest ^ z.re.to_bits()) ^ z.im.to_bits().rotate_left(17);
            }
        }
        received.push(apply_channel_with_noise(&block.symbols, ch, &noise)?);
    }
    Ok((received, digest))
}

fn chain_counts(result: &DecodeResult, ok: &[bool]) -> [ChainCounts; 2] {
    let n = ok.len();
    let mut c = [ChainCounts::default(); 2];
    for (p, step) in result.trace.iter().enumerate() {
        let (slot, pred) = match step.direction {
            Direction::Forward => (0, p.checked_sub(1).filter(|&q| result.trace[q].direction == Direction::Forward)),
            Direction::Backward => (1, Some(p + 1).filter(|&q| q < n && result.trace[q].direction == Direction::Backward)),
            Direction::Stacked | Direction::Concatenated => (0, None),
        };
        let counts = &mut c[slot];
        match pred {
            None => {
                counts.starts += 1;
                counts.start_ok += u64::from(ok[p]);
            }
            Some(q) if ok[q] => {
                counts.conditioned += 1;
                counts.conditioned_ok += u64::from(ok[p]);
            }
            Some(_) => {}
        }
    }
    c
}

/// One end-to-end transmission of `N` packets with `scheme`.
pub fn run_trial(setup: &LinkSetup, scheme: Scheme, trial: u64) -> Result<TrialOutcome> {
    let cfg = &setup.config;
    let seed = trial_seed(cfg, scheme, trial);
    let payloads = random_payloads(seed, cfg.n_packets, cfg.k);
    let (result, noise_digest) = match scheme {
        Scheme::Swsc | Scheme::Eswsc => {
            let frame = swsc_encode(&payloads, &setup.swsc_coder, cfg.beta, setup.params.clean_seed)?;
            let (rx, digest) = transmit(setup, scheme, seed, &frame.blocks)?;
            let result = if scheme == Scheme::Swsc {
                swsc_decode(&rx, &setup.swsc_coder, &setup.params)?
            } else {
                eswsc_decode(&rx, &setup.swsc_coder, &setup.params, cfg.alpha)?
            };
            (result, digest)
        }
        Scheme::LdpcStacked | Scheme::Mldpc => {
            let layout = if scheme == Scheme::Mldpc { &setup.mldpc } else { &setup.stacked };
            let blocks = layout.encode(&payloads, cfg.beta)?;
            let (rx, digest) = transmit(setup, scheme, seed, &blocks)?;
            (layout.decode(&rx, &setup.params)?, digest)
        }
    };
    let ok: Vec<bool> = result.packets.iter().zip(&payloads).map(|(a, b)| a == b).collect();
    let packet_errors = ok.iter().filter(|&&o| !o).count() as u64;
    Ok(TrialOutcome {
        success: packet_errors == 0,
        packet_errors,
        chains: chain_counts(&result, &ok),
        blocks_sent: result.blocks_sent,
        noise_digest,
    })
}

/// Aggregated outcome of one scheme at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub swept_param: String,
    pub value: String,
    pub estimate: MerEstimate,
    pub packet_errors: u64,
    pub bler: f64,
    pub p_clean: Option<f64>,
    pub p_assumed: Option<f64>,
    /// Closed-form MER from the measured chain probabilities (or from the
    /// BLER for the baselines, whose packets are decoded independently).
    pub predicted_mer: f64,
    /// As `predicted_mer`, but with separate probabilities for each chain.
    pub predicted_mer_per_chain: f64,
    pub chains: [ChainCounts; 2],
    pub blocks_sent: usize,
    pub noise_digest: u64,
    pub seed: u64,
    pub wall_time_s: f64,
    pub config: ExperimentConfig,
}

fn predicted(scheme: Scheme, cfg: &ExperimentConfig, pooled: &ChainCounts, chains: &[ChainCounts; 2], bler: f64) -> Result<(f64, f64)> {
    let n = cfg.n_packets;
    Ok(match scheme {
        Scheme::LdpcStacked | Scheme::Mldpc => {
            let m = analysis::mer_from_bler(bler, n)?;
            (m, m)
        }
        Scheme::Swsc | Scheme::Eswsc => {
            let pc = pooled.p_clean().unwrap_or(1.0);
            let pa = pooled.p_assumed().unwrap_or(pc);
            let pooled_mer = if scheme == Scheme::Swsc {
                1.0 - analysis::p_swsc(pc, pa, n)?
            } else {
                1.0 - analysis::p_eswsc(pc, pa, n, cfg.alpha)?
            };
            let tail = if scheme == Scheme::Swsc { 0 } else { swsc_core::tail_len(cfg.alpha, n) };
            let mut success = 1.0;
            for (dir, len) in [(0, n - tail), (1, tail)] {
                let c = &chains[dir];
                let pc = c.p_clean().unwrap_or(1.0);
                let pa = c.p_assumed().unwrap_or(pc);
                success *= analysis::chain_success(pc, pa, len);
            }
            (pooled_mer, 1.0 - success)
        }
    })
}

pub(crate) fn aggregate(
    setup: &LinkSetup,
    scheme: Scheme,
    outcomes: &[TrialOutcome],
    wall_time_s: f64,
) -> Result<ResultRow> {
    let cfg = &setup.config;
    let trials = outcomes.len() as u64;
    let failures = outcomes.iter().filter(|o| !o.success).count() as u64;
    let estimate = MerEstimate::from_counts(failures, trials)?;
    let packet_errors: u64 = outcomes.iter().map(|o| o.packet_errors).sum();
    let bler = packet_errors as f64 / (trials * cfg.n_packets as u64) as f64;
    let mut chains = [ChainCounts::default(); 2];
    let mut noise_digest = 0u64;
    for o in outcomes {
        chains[0].add(&o.chains[0]);
        chains[1].add(&o.chains[1]);
        noise_digest = mix64(noise_digest ^ o.noise_digest);
    }
    let mut pooled = chains[0];
    pooled.add(&chains[1]);
    let (predicted_mer, predicted_mer_per_chain) = predicted(scheme, cfg, &pooled, &chains, bler)?;
    if failures < 10 {
        warn!(
            "{scheme}: {failures} failures in {trials} trials; MER below {:.2e} is not resolved",
            10.0 / trials as f64
        );
    }
    Ok(ResultRow {
        scheme,
        swept_param: String::new(),
        value: String::new(),
        estimate,
        packet_errors,
        bler,
        p_clean: pooled.p_clean(),
        p_assumed: match scheme {
            Scheme::Swsc | Scheme::Eswsc => pooled.p_assumed(),
            Scheme::LdpcStacked | Scheme::Mldpc => None,
        },
        predicted_mer,
        predicted_mer_per_chain,
        chains,
        blocks_sent: outcomes.first().map_or(0, |o| o.blocks_sent),
        noise_digest,
        seed: cfg.master_seed,
        wall_time_s,
        config: cfg.clone(),
    })
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w);
    }
    b.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Runs `config.trials` trials of every configured scheme.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let setup = LinkSetup::new(config)?;
    run_with_setup(&setup)
}

pub fn run_with_setup(setup: &LinkSetup) -> Result<Vec<ResultRow>> {
    let cfg = &setup.config;
    let pool = pool(cfg.workers)?;
    let mut rows = Vec::with_capacity(cfg.schemes.len());
    for &scheme in &cfg.schemes {
        let start = Instant::now();
        let outcomes = pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(setup, scheme, t))
                .collect::<Result<Vec<_>>>()
        })?;
        let row = aggregate(setup, scheme, &outcomes, start.elapsed().as_secs_f64())?;
        info!(
            "{scheme}: snr {} dB, {} failures / {} trials, mer {:.3e}, bler {:.3e}",
            cfg.snr_db, row.estimate.failures, row.estimate.trials, row.estimate.mer, row.bler
        );
        rows.push(row);
    }
    Ok(rows)
}
