//! Channel application and MIMO eigen-channels.
//!
//! Every block goes through `y = g * e + w` with `w ~ CN(0, noise_var)`. The
//! receiver is coherent: it divides by the gain, so what reaches the demappers
//! is `e + w / g` with per-symbol noise variance `noise_var / |g|^2`.
//!
//! For a MIMO link the 4x4 matrix is diagonalized by SVD precoding. Data
//! symbols are striped round-robin over the four eigen-streams with an equal
//! power split, so symbol `j` sees amplitude gain `sigma[j % 4] / 2`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Floor applied to noise variances so that a "noiseless" link still yields
/// finite LLRs.
pub const MIN_NOISE_VAR: f64 = 1e-12;

pub const MIMO_STREAMS: usize = 4;

/// Noise variance per complex symbol for unit-energy symbols at `snr_db`.
pub fn noise_var_for_snr_db(snr_db: f64) -> f64 {
    libm::pow(10.0, -snr_db / 10.0).max(MIN_NOISE_VAR)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelSource {
    Awgn,
    Rayleigh,
    ImportedGain,
    ImportedSvd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockGain {
    Scalar(Complex64),
    /// Per-stream amplitude gains, applied round-robin over the symbols.
    Streams([f64; MIMO_STREAMS]),
}

impl BlockGain {
    pub fn at(&self, symbol: usize) -> Complex64 {
        match self {
            BlockGain::Scalar(g) => *g,
            BlockGain::Streams(s) => Complex64::new(s[symbol % MIMO_STREAMS], 0.0),
        }
    }
}

/// Gain and noise level seen by one transmitted block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockChannel {
    pub gain: BlockGain,
    pub noise_var: f64,
}

impl BlockChannel {
    pub fn awgn(noise_var: f64) -> Self {
        Self {
            gain: BlockGain::Scalar(Complex64::new(1.0, 0.0)),
            noise_var,
        }
    }

    /// Equal-power eigen-stream gains from the singular values of a MIMO matrix.
    pub fn from_singular_values(sv: [f64; MIMO_STREAMS], noise_var: f64) -> Self {
        let scale = 1.0 / libm::sqrt(MIMO_STREAMS as f64);
        Self {
            gain: BlockGain::Streams(sv.map(|s| s * scale)),
            noise_var,
        }
    }
}

/// Channel state for every block of one transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub source: ChannelSource,
    pub blocks: Vec<BlockChannel>,
}

impl ChannelRealization {
    pub fn awgn(blocks: usize, snr_db: f64) -> Self {
        Self {
            source: ChannelSource::Awgn,
            blocks: vec![BlockChannel::awgn(noise_var_for_snr_db(snr_db)); blocks],
        }
    }

    /// Independent `CN(0, 1)` block gains.
    pub fn rayleigh(blocks: usize, snr_db: f64, rng: &mut impl Rng) -> Self {
        let nv = noise_var_for_snr_db(snr_db);
        Self {
            source: ChannelSource::Rayleigh,
            blocks: (0..blocks)
                .map(|_| BlockChannel {
                    gain: BlockGain::Scalar(standard_complex_normal(rng)),
                    noise_var: nv,
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, b) in self.blocks.iter().enumerate() {
            if !(b.noise_var > 0.0 && b.noise_var.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "block {i}: noise variance must be positive, got {}",
                    b.noise_var
                )));
            }
        }
        Ok(())
    }
}

/// Equalized received block: symbols divided by the channel gain, together
/// with the resulting noise variance of each symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Received {
    pub symbols: Vec<Complex64>,
    pub noise_var: Vec<f64>,
}

impl Received {
    /// A noise-free observation with a nominal noise level.
    pub fn clean(symbols: &[Complex64], noise_var: f64) -> Self {
        Self {
            symbols: symbols.to_vec(),
            noise_var: vec![noise_var.max(MIN_NOISE_VAR); symbols.len()],
        }
    }
}

/// `z ~ CN(0, 1)`: independent `N(0, 1/2)` real and imaginary parts.
pub fn standard_complex_normal(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

/// Unit-variance complex noise samples.
pub fn unit_noise(rng: &mut impl Rng, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| standard_complex_normal(rng)).collect()
}

/// Applies the block channel with caller-supplied unit-variance noise
/// samples (scaled here by `sqrt(noise_var)`), then equalizes.
pub fn apply_channel_with_noise(
    symbols: &[Complex64],
    channel: &BlockChannel,
    unit_noise: &[Complex64],
) -> Result<Received> {
    crate::error::expect_len("noise samples", symbols.len(), unit_noise.len())?;
    let nv = channel.noise_var.max(MIN_NOISE_VAR);
    if !nv.is_finite() {
        return Err(Error::InvalidArgument("noise variance must be finite".into()));
    }
    let sd = libm::sqrt(nv);
    let mut out = Vec::with_capacity(symbols.len());
    let mut noise_var = Vec::with_capacity(symbols.len());
    for (j, (&e, &z)) in symbols.iter().zip(unit_noise).enumerate() {
        let g = channel.gain.at(j);
        let power = g.norm_sqr().max(f64::MIN_POSITIVE);
        let y = g * e + z * sd;
        out.push(if g.norm_sqr() > 0.0 { y / g } else { Complex64::new(0.0, 0.0) });
        noise_var.push((nv / power).min(1e300));
    }
    Ok(Received {
        symbols: out,
        noise_var,
    })
}

pub fn apply_channel(symbols: &[Complex64], channel: &BlockChannel, rng: &mut impl Rng) -> Result<Received> {
    let noise = unit_noise(rng, symbols.len());
    apply_channel_with_noise(symbols, channel, &noise)
}

/// Deterministic for a fixed `seed`.
pub fn apply_channel_seeded(symbols: &[Complex64], channel: &BlockChannel, seed: u64) -> Result<Received> {
    apply_channel(symbols, channel, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Square complex matrix, row-major.
pub type Matrix4 = [[Complex64; MIMO_STREAMS]; MIMO_STREAMS];

/// Singular value decomposition `H = U * diag(sigma) * V^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: Matrix4,
    pub sigma: [f64; MIMO_STREAMS],
    pub v: Matrix4,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix4 {
        let mut h = [[Complex64::new(0.0, 0.0); MIMO_STREAMS]; MIMO_STREAMS];
        for (i, row) in h.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for k in 0..MIMO_STREAMS {
                    *cell += self.u[i][k] * self.sigma[k] * self.v[j][k].conj();
                }
            }
        }
        h
    }
}

/// One-sided (Hestenes) Jacobi SVD of a 4x4 complex matrix.
pub fn svd(h: &Matrix4) -> Result<Svd> {
    const N: usize = MIMO_STREAMS;
    if h.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("channel matrix has non-finite entries".into()));
    }
    let zero = Complex64::new(0.0, 0.0);
    // columns of A = H V
    let mut a = [[zero; N]; N];
    let mut v = [[zero; N]; N];
    for j in 0..N {
        for i in 0..N {
            a[j][i] = h[i][j];
        }
        v[j][j] = Complex64::new(1.0, 0.0);
    }
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..N {
            for q in p + 1..N {
                let alpha: f64 = a[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = a[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = a[p].iter().zip(&a[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= 1e-15 * libm::sqrt(alpha * beta) || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for cols in [&mut a, &mut v] {
                    let (lo, hi) = cols.split_at_mut(q);
                    for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let (x, y) = (*xp, *xq * phase.conj());
                        *xp = x * c - y * s;
                        *xq = x * s + y * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: [usize; N] = [0, 1, 2, 3];
    let norms: [f64; N] = core::array::from_fn(|j| libm::sqrt(a[j].iter().map(|z| z.norm_sqr()).sum()));
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let scale: f64 = norms.iter().copied().fold(0.0, f64::max);
    let mut u_cols: Vec<[Complex64; N]> = Vec::with_capacity(N);
    let mut sigma = [0.0; N];
    let mut v_cols = [[zero; N]; N];
    for (slot, &j) in order.iter().enumerate() {
        sigma[slot] = norms[j];
        v_cols[slot] = v[j];
        if norms[j] > 1e-14 * scale.max(f64::MIN_POSITIVE) {
            u_cols.push(a[j].map(|z| z / norms[j]));
        } else {
            u_cols.push(complete_basis(&u_cols));
        }
    }
    let mut u = [[zero; N]; N];
    let mut vm = [[zero; N]; N];
    for i in 0..N {
        for j in 0..N {
            u[i][j] = u_cols[j][i];
            vm[i][j] = v_cols[j][i];
        }
    }
    Ok(Svd { u, sigma, v: vm })
}

/// A unit vector orthogonal to all of `basis` (Gram-Schmidt on e_1..e_4).
fn complete_basis(basis: &[[Complex64; MIMO_STREAMS]]) -> [Complex64; MIMO_STREAMS] {
    let zero = Complex64::new(0.0, 0.0);
    let mut best = [zero; MIMO_STREAMS];
    let mut best_norm = -1.0;
    for e in 0..MIMO_STREAMS {
        let mut x = [zero; MIMO_STREAMS];
        x[e] = Complex64::new(1.0, 0.0);
        for b in basis {
            let proj: Complex64 = b.iter().zip(&x).map(|(bi, xi)| bi.conj() * xi).sum();
            for i in 0..MIMO_STREAMS {
                x[i] -= b[i] * proj;
            }
        }
        let norm = libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum());
        if norm > best_norm {
            best_norm = norm;
            best = x.map(|z| z / norm);
        }
    }
    best
}

/// Singular values of the 4x4 channel, non-increasing.
pub fn svd_subchannels(h: &Matrix4) -> Result<[f64; MIMO_STREAMS]> {
    Ok(svd(h)?.sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_matrix(rng: &mut ChaCha8Rng) -> Matrix4 {
        core::array::from_fn(|_| core::array::from_fn(|_| standard_complex_normal(rng)))
    }

    fn frobenius_diff(a: &Matrix4, b: &Matrix4) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += (a[i][j] - b[i][j]).norm_sqr();
            }
        }
        s.sqrt()
    }

    #[test]
    fn identity_and_diagonal() {
        let mut id = [[c(0.0); 4]; 4];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = c(1.0);
        }
        assert_eq!(svd_subchannels(&id).unwrap(), [1.0; 4]);
        let mut d = [[c(0.0); 4]; 4];
        let diag = [0.5, 2.0, 0.1, 1.0];
        for i in 0..4 {
            d[i][i] = c(diag[i]);
        }
        let sv = svd_subchannels(&d).unwrap();
        for (got, want) in sv.iter().zip([2.0, 1.0, 0.5, 0.1]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn reconstruction_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let h = random_matrix(&mut rng);
            let s = svd(&h).unwrap();
            assert!(frobenius_diff(&s.reconstruct(), &h) <= 1e-9);
            assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rank_deficient_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut h = random_matrix(&mut rng);
        h[3] = h[0];
        let s = svd(&h).unwrap();
        assert!(s.sigma[3] < 1e-9);
        assert!(frobenius_diff(&s.reconstruct(), &h) <= 1e-9);
        // U stays unitary
        for a in 0..4 {
            for b in 0..4 {
                let dot: Complex64 = (0..4).map(|i| s.u[i][a].conj() * s.u[i][b]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot.re, want, epsilon = 1e-9);
                assert_abs_diff_eq!(dot.im, 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn non_finite_rejected() {
        let mut h = [[c(1.0); 4]; 4];
        h[1][2] = Complex64::new(f64::NAN, 0.0);
        assert!(svd_subchannels(&h).is_err());
    }

    #[test]
    fn near_noiseless_passes_symbols_through() {
        let syms: Vec<Complex64> = (0..32).map(|i| Complex64::new(i as f64 * 0.1, -0.3)).collect();
        let rx = apply_channel_seeded(&syms, &BlockChannel::awgn(0.0), 1).unwrap();
        for (a, b) in rx.symbols.iter().zip(&syms) {
            assert!((a - b).norm() < 1e-5);
        }
        assert!(rx.noise_var.iter().all(|&v| v == MIN_NOISE_VAR));
    }

    #[test]
    fn awgn_empirical_variance_at_16_db() {
        let nv = noise_var_for_snr_db(16.0);
        assert_abs_diff_eq!(nv, 10f64.powf(-1.6), epsilon = 1e-15);
        let n = 1_000_000;
        let zeros = vec![c(0.0); n];
        let rx = apply_channel_seeded(&zeros, &BlockChannel::awgn(nv), 123).unwrap();
        let var: f64 = rx.symbols.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((var / nv - 1.0).abs() < 0.01, "{var} vs {nv}");
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let syms = vec![c(1.0); 64];
        let ch = BlockChannel::awgn(0.3);
        assert_eq!(
            apply_channel_seeded(&syms, &ch, 5).unwrap(),
            apply_channel_seeded(&syms, &ch, 5).unwrap()
        );
        assert_ne!(
            apply_channel_seeded(&syms, &ch, 5).unwrap(),
            apply_channel_seeded(&syms, &ch, 6).unwrap()
        );
    }

    #[test]
    fn fading_is_equalized() {
        let g = Complex64::new(0.3, -0.4);
        let ch = BlockChannel {
            gain: BlockGain::Scalar(g),
            noise_var: 0.1,
        };
        let syms = vec![c(1.0); 4];
        let rx = apply_channel_with_noise(&syms, &ch, &[c(0.0); 4]).unwrap();
        for z in &rx.symbols {
            assert_abs_diff_eq!(z.re, 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(rx.noise_var[0], 0.1 / 0.25, epsilon = 1e-12);
    }

    #[test]
    fn stream_gains_round_robin() {
        let ch = BlockChannel::from_singular_values([2.0, 1.0, 0.5, 0.1], 0.1);
        let rx = apply_channel_with_noise(&[c(1.0); 8], &ch, &[c(0.0); 8]).unwrap();
        assert_abs_diff_eq!(rx.noise_var[0], 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(rx.noise_var[5], 0.1 / 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(rx.noise_var[3], 0.1 / 0.0025, epsilon = 1e-9);
    }
}
