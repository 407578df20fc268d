//! Two-layer superposed QPSK and its soft demappers.
//!
//! Each complex symbol carries two bits of layer 1 and two bits of layer 2:
//!
//! ```text
//! e = sqrt(beta) * u1 + sqrt(1 - beta) * u2
//! ```
//!
//! where `u1`, `u2` are unit-energy Gray-mapped QPSK points. Per dimension a
//! bit `b` maps to `(1 - 2b) / sqrt(2)`; the even-indexed bit of a pair rides
//! on I and the odd-indexed bit on Q. Because the I and Q noise components are
//! independent, every demapper factorizes per dimension.
//!
//! Noise variance is per complex symbol (`E|w|^2`), so each real dimension
//! sees variance `noise_var / 2` and the likelihood of a hypothesis `x` is
//! proportional to `exp(-(r - x)^2 / noise_var)`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::ecc::LlrVector;
use crate::error::expect_len;
use crate::{Error, Result};

pub const DEFAULT_BETA: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    One,
    Two,
}

impl Layer {
    pub fn other(self) -> Self {
        match self {
            Layer::One => Layer::Two,
            Layer::Two => Layer::One,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DemapMode {
    #[default]
    Exact,
    MaxLog,
}

/// Noise variance of each received symbol.
#[derive(Debug, Clone, Copy)]
pub enum NoiseVar<'a> {
    Uniform(f64),
    PerSymbol(&'a [f64]),
}

impl From<f64> for NoiseVar<'_> {
    fn from(v: f64) -> Self {
        NoiseVar::Uniform(v)
    }
}

impl<'a> From<&'a [f64]> for NoiseVar<'a> {
    fn from(v: &'a [f64]) -> Self {
        NoiseVar::PerSymbol(v)
    }
}

impl<'a> From<&'a Vec<f64>> for NoiseVar<'a> {
    fn from(v: &'a Vec<f64>) -> Self {
        NoiseVar::PerSymbol(v)
    }
}

impl NoiseVar<'_> {
    fn validate(&self, symbols: usize) -> Result<()> {
        let bad = |v: f64| !(v > 0.0 && v.is_finite());
        match *self {
            NoiseVar::Uniform(v) if bad(v) => Err(Error::InvalidArgument(format!(
                "noise variance must be positive and finite, got {v}"
            ))),
            NoiseVar::PerSymbol(vs) => {
                expect_len("per-symbol noise variances", symbols, vs.len())?;
                match vs.iter().find(|&&v| bad(v)) {
                    Some(v) => Err(Error::InvalidArgument(format!(
                        "noise variance must be positive and finite, got {v}"
                    ))),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    fn at(&self, i: usize) -> f64 {
        match *self {
            NoiseVar::Uniform(v) => v,
            NoiseVar::PerSymbol(vs) => vs[i],
        }
    }
}

/// One block of superposed symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperposedBlock {
    pub symbols: Vec<Complex64>,
    pub layer_bits_len: usize,
    pub beta: f64,
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.5 && beta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "power ratio beta must lie in (0.5, 1), got {beta}"
        )));
    }
    Ok(())
}

/// Per-dimension amplitude of each layer.
fn amplitudes(beta: f64) -> (f64, f64) {
    (libm::sqrt(beta / 2.0), libm::sqrt((1.0 - beta) / 2.0))
}

fn amplitude(layer: Layer, beta: f64) -> f64 {
    let (a1, a2) = amplitudes(beta);
    match layer {
        Layer::One => a1,
        Layer::Two => a2,
    }
}

#[inline]
fn sign(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Unit-energy Gray QPSK point for a bit pair.
pub fn qpsk_symbol(b0: u8, b1: u8) -> Complex64 {
    Complex64::new(sign(b0) * FRAC_1_SQRT_2, sign(b1) * FRAC_1_SQRT_2)
}

pub fn modulate_superposed(layer1: &[u8], layer2: &[u8], beta: f64) -> Result<SuperposedBlock> {
    check_beta(beta)?;
    expect_len("layer 2 bits", layer1.len(), layer2.len())?;
    if !layer1.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "layer length {} is odd; QPSK needs bit pairs",
            layer1.len()
        )));
    }
    let (s1, s2) = (libm::sqrt(beta), libm::sqrt(1.0 - beta));
    let symbols = layer1
        .chunks_exact(2)
        .zip(layer2.chunks_exact(2))
        .map(|(p, q)| qpsk_symbol(p[0], p[1]) * s1 + qpsk_symbol(q[0], q[1]) * s2)
        .collect();
    Ok(SuperposedBlock {
        symbols,
        layer_bits_len: layer1.len(),
        beta,
    })
}

/// Re-creates one layer's contribution to a block.
pub fn layer_contribution(layer: Layer, bits: &[u8], beta: f64) -> Vec<Complex64> {
    let s = match layer {
        Layer::One => libm::sqrt(beta),
        Layer::Two => libm::sqrt(1.0 - beta),
    };
    bits.chunks_exact(2)
        .map(|p| qpsk_symbol(p[0], p[1]) * s)
        .collect()
}

#[inline]
fn log_sum_exp(a: f64, b: f64, mode: DemapMode) -> f64 {
    let hi = a.max(b);
    match mode {
        DemapMode::MaxLog => hi,
        DemapMode::Exact => hi + libm::log1p(libm::exp(-(a - b).abs())),
    }
}

/// LLR of the target-layer bit in one dimension with the other layer's sign
/// unknown and equiprobable.
#[inline]
fn tin_dim(r: f64, target_amp: f64, other_amp: f64, nv: f64, mode: DemapMode) -> f64 {
    let metric = |x: f64| -(r - x) * (r - x) / nv;
    let zero = log_sum_exp(
        metric(target_amp + other_amp),
        metric(target_amp - other_amp),
        mode,
    );
    let one = log_sum_exp(
        metric(-target_amp + other_amp),
        metric(-target_amp - other_amp),
        mode,
    );
    zero - one
}

/// Unclamped LLRs of the two target-layer bits in one received symbol,
/// marginalizing over the other layer.
pub fn tin_symbol_llrs(y: Complex64, target: Layer, beta: f64, nv: f64, mode: DemapMode) -> [f64; 2] {
    let at = amplitude(target, beta);
    let ao = amplitude(target.other(), beta);
    [tin_dim(y.re, at, ao, nv, mode), tin_dim(y.im, at, ao, nv, mode)]
}

/// Unclamped LLRs of the two unknown-layer bits in one received symbol after
/// cancelling the known layer.
pub fn known_symbol_llrs(y: Complex64, known_layer: Layer, known: [u8; 2], beta: f64, nv: f64) -> [f64; 2] {
    let ak = amplitude(known_layer, beta);
    let at = amplitude(known_layer.other(), beta);
    let re = y.re - ak * sign(known[0]);
    let im = y.im - ak * sign(known[1]);
    [4.0 * at * re / nv, 4.0 * at * im / nv]
}

/// LLRs for the layer other than `known_layer`, given that layer's bits.
pub fn demod_with_known<'a>(
    symbols: &[Complex64],
    known_layer: Layer,
    known_bits: &[u8],
    beta: f64,
    noise: impl Into<NoiseVar<'a>>,
) -> Result<LlrVector> {
    check_beta(beta)?;
    let noise = noise.into();
    noise.validate(symbols.len())?;
    expect_len("known layer bits", 2 * symbols.len(), known_bits.len())?;
    let mut out = Vec::with_capacity(2 * symbols.len());
    for (i, (&y, kb)) in symbols.iter().zip(known_bits.chunks_exact(2)).enumerate() {
        out.extend(known_symbol_llrs(y, known_layer, [kb[0], kb[1]], beta, noise.at(i)));
    }
    Ok(LlrVector::new(out))
}

/// LLRs for `target`, treating the other layer as interference.
pub fn demod_tin<'a>(
    symbols: &[Complex64],
    target: Layer,
    beta: f64,
    noise: impl Into<NoiseVar<'a>>,
    mode: DemapMode,
) -> Result<LlrVector> {
    check_beta(beta)?;
    let noise = noise.into();
    noise.validate(symbols.len())?;
    let mut out = Vec::with_capacity(2 * symbols.len());
    for (i, &y) in symbols.iter().enumerate() {
        out.extend(tin_symbol_llrs(y, target, beta, noise.at(i), mode));
    }
    Ok(LlrVector::new(out))
}

/// Joint demapping of both layers when neither is known. The 16-point
/// composite posterior factorizes per dimension, so each layer's marginal is
/// the TIN demapper of that layer.
pub fn demod_joint<'a>(
    symbols: &[Complex64],
    beta: f64,
    noise: impl Into<NoiseVar<'a>>,
    mode: DemapMode,
) -> Result<(LlrVector, LlrVector)> {
    let noise = noise.into();
    Ok((
        demod_tin(symbols, Layer::One, beta, noise, mode)?,
        demod_tin(symbols, Layer::Two, beta, noise, mode)?,
    ))
}
