//! Experiment configuration, read from TOML.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use swsc_core::superposition::DemapMode;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Swsc,
    Eswsc,
    LdpcStacked,
    Mldpc,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Swsc, Scheme::Eswsc, Scheme::LdpcStacked, Scheme::Mldpc];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Swsc => "swsc",
            Scheme::Eswsc => "eswsc",
            Scheme::LdpcStacked => "ldpc_stacked",
            Scheme::Mldpc => "mldpc",
        }
    }

    pub(crate) fn tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}` (expected swsc, eswsc, ldpc_stacked or mldpc)")))
    }
}

/// A code rate `num/den`. Written either as a bare numerator over 1024, the
/// 5G convention, or as a string `"a/b"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RateRepr", into = "String")]
pub struct CodeRate {
    pub num: u32,
    pub den: u32,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RateRepr {
    Num(u32),
    Text(String),
}

impl TryFrom<RateRepr> for CodeRate {
    type Error = Error;

    fn try_from(r: RateRepr) -> Result<Self> {
        match r {
            RateRepr::Num(n) => CodeRate::new(n, 1024),
            RateRepr::Text(s) => s.parse(),
        }
    }
}

impl From<CodeRate> for String {
    fn from(r: CodeRate) -> String {
        r.to_string()
    }
}

impl CodeRate {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 || num >= den {
            return Err(Error::Config(format!("code rate {num}/{den} must lie strictly between 0 and 1")));
        }
        Ok(Self { num, den })
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Smallest codeword length that is a multiple of 4 and carries `info`
    /// bits at no more than this rate.
    pub fn codeword_len(self, info: usize) -> usize {
        let n = (info as u64 * self.den as u64).div_ceil(self.num as u64) as usize;
        n.div_ceil(4) * 4
    }
}

impl fmt::Display for CodeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for CodeRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse code rate `{s}`"));
        match s.split_once('/') {
            Some((a, b)) => CodeRate::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => CodeRate::new(s.trim().parse().map_err(|_| bad())?, 1024),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSpec {
    Awgn,
    Rayleigh,
    /// Transmission without noise (the noise variance floor still applies).
    Noiseless,
    /// Per-receiver gains or MIMO matrices from a CSV file.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Demapper {
    #[default]
    Exact,
    MaxLog,
}

impl From<Demapper> for DemapMode {
    fn from(d: Demapper) -> Self {
        match d {
            Demapper::Exact => DemapMode::Exact,
            Demapper::MaxLog => DemapMode::MaxLog,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schemes: Vec<Scheme>,
    /// Transport block length in bits, before the CRC.
    pub k: usize,
    pub code_rate: CodeRate,
    pub snr_db: f64,
    pub alpha: f64,
    pub n_packets: usize,
    pub beta: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub channel: ChannelSpec,
    pub crc: bool,
    pub max_iters: usize,
    pub demapper: Demapper,
    /// Feed every scheme the same payloads and noise in trial `t`.
    pub pair_noise: bool,
    /// Worker threads; `None` uses all cores.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schemes: Scheme::ALL.to_vec(),
            k: 200,
            code_rate: CodeRate { num: 460, den: 1024 },
            snr_db: 16.0,
            alpha: 0.5,
            n_packets: 100,
            beta: swsc_core::superposition::DEFAULT_BETA,
            trials: 250,
            master_seed: 0,
            channel: ChannelSpec::Awgn,
            crc: true,
            max_iters: swsc_core::ecc::DEFAULT_MAX_ITERS,
            demapper: Demapper::Exact,
            pair_noise: true,
            workers: None,
        }
    }
}

pub const CRC_BITS: usize = 16;

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: Self = toml::from_str(&text)?;
        // channel files are resolved relative to the config file
        if let (ChannelSpec::File(p), Some(dir)) = (&mut cfg.channel, path.parent()) {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    /// Bits entering the channel code per packet.
    pub fn info_len(&self) -> usize {
        self.k + if self.crc { CRC_BITS } else { 0 }
    }

    pub fn swsc_codeword_len(&self) -> usize {
        self.code_rate.codeword_len(self.info_len())
    }

    pub fn baseline_codeword_len(&self) -> usize {
        swsc_core::baseline::compensated_codeword_len(self.swsc_codeword_len(), self.n_packets)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.schemes.is_empty() {
            return fail("no schemes selected".into());
        }
        if self.k == 0 {
            return fail("k must be positive".into());
        }
        if self.n_packets == 0 {
            return fail("n_packets must be at least 1".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if !(self.beta > 0.5 && self.beta < 1.0) {
            return fail(format!("beta must lie in (0.5, 1), got {}", self.beta));
        }
        if !(0.0..=0.5).contains(&self.alpha) {
            return fail(format!("alpha must lie in [0, 0.5], got {}", self.alpha));
        }
        if !self.snr_db.is_finite() {
            return fail("snr_db must be finite".into());
        }
        if self.max_iters == 0 {
            return fail("max_iters must be at least 1".into());
        }
        if self.workers == Some(0) {
            return fail("workers must be at least 1".into());
        }
        let n = self.swsc_codeword_len();
        if n <= self.info_len() {
            return fail(format!("code rate {} leaves no parity bits", self.code_rate));
        }
        let mut seen = self.schemes.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.schemes.len() {
            return fail("schemes listed more than once".into());
        }
        Ok(())
    }
}
