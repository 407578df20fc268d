//! Closed-form message error rate model and empirical estimates.
//!
//! A broadcast round of `N` packets succeeds only if every packet is decoded.
//! With independent packet errors, `MER = 1 - (1 - BLER)^N`. For a decoding
//! chain, `P_clean` is the success probability of the packet decoded next to a
//! known sequence and `P_assumed` the success probability of a packet whose
//! predecessor in the chain was decoded correctly; a chain of length `L` then
//! succeeds with probability `P_clean * P_assumed^(L - 1)`.

use alloc::format;

use crate::{check_alpha, tail_len, Error, Result};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "{name} must be a probability in [0, 1], got {p}"
        )));
    }
    Ok(())
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("packet count must be at least 1".into()));
    }
    Ok(())
}

fn powi(x: f64, e: usize) -> f64 {
    libm::pow(x, e as f64)
}

pub fn mer_from_bler(bler: f64, n: usize) -> Result<f64> {
    check_probability("bler", bler)?;
    check_count(n)?;
    // 1 - (1 - b)^N without cancellation for small b
    Ok(-libm::expm1(n as f64 * libm::log1p(-bler)))
}

/// Inverse of [`mer_from_bler`]: `1 - (1 - mer)^(1/N)`.
pub fn bler_for_mer(mer: f64, n: usize) -> Result<f64> {
    if !(mer > 0.0 && mer < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "mer must lie in (0, 1), got {mer}"
        )));
    }
    check_count(n)?;
    Ok(-libm::expm1(libm::log1p(-mer) / n as f64))
}

/// Success probability of one chain of `len` packets; an empty chain always
/// succeeds.
pub fn chain_success(p_clean: f64, p_assumed: f64, len: usize) -> f64 {
    if len == 0 {
        1.0
    } else {
        p_clean * powi(p_assumed, len - 1)
    }
}

/// `P_clean * P_assumed^(N - 1)`
pub fn p_swsc(p_clean: f64, p_assumed: f64, n: usize) -> Result<f64> {
    check_probability("p_clean", p_clean)?;
    check_probability("p_assumed", p_assumed)?;
    check_count(n)?;
    Ok(chain_success(p_clean, p_assumed, n))
}

/// Two independent chains of lengths `N - B` (forward) and `B = ceil(alpha N)`
/// (backward). At `alpha = 0` this is [`p_swsc`]; whenever both chains are
/// non-empty it equals `P_clean^2 * P_assumed^(N - 2)`.
pub fn p_eswsc(p_clean: f64, p_assumed: f64, n: usize, alpha: f64) -> Result<f64> {
    check_probability("p_clean", p_clean)?;
    check_probability("p_assumed", p_assumed)?;
    check_count(n)?;
    check_alpha(alpha)?;
    let b = tail_len(alpha, n);
    Ok(chain_success(p_clean, p_assumed, n - b) * chain_success(p_clean, p_assumed, b))
}

/// The two-equal-halves form `P_clean^2 * P_assumed^(N - 2)`, defined for
/// `N >= 2`.
pub fn p_eswsc_halves(p_clean: f64, p_assumed: f64, n: usize) -> Result<f64> {
    check_probability("p_clean", p_clean)?;
    check_probability("p_assumed", p_assumed)?;
    if n < 2 {
        return Err(Error::InvalidArgument("two chains need N >= 2".into()));
    }
    Ok(p_clean * p_clean * powi(p_assumed, n - 2))
}

/// Message error rate over a set of trials with a 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MerEstimate {
    pub trials: u64,
    pub failures: u64,
    pub mer: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl MerEstimate {
    pub fn from_counts(failures: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidArgument("no trials".into()));
        }
        if failures > trials {
            return Err(Error::InvalidArgument(format!(
                "{failures} failures out of {trials} trials"
            )));
        }
        let (ci_low, ci_high) = wilson_interval(failures, trials, Z_95);
        Ok(Self {
            trials,
            failures,
            mer: failures as f64 / trials as f64,
            ci_low,
            ci_high,
        })
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }

    pub fn overlaps(&self, other: &MerEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// Wilson score interval for a binomial proportion, clamped to `[0, 1]` and
/// always containing the point estimate.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

/// Aggregates per-trial success flags (a trial succeeds when every packet of
/// the round was recovered).
pub fn estimate_mer(success: &[bool]) -> Result<MerEstimate> {
    if success.is_empty() {
        return Err(Error::InvalidArgument("no trial outcomes".into()));
    }
    let failures = success.iter().filter(|&&s| !s).count() as u64;
    MerEstimate::from_counts(failures, success.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mer_from_bler_examples() {
        assert_abs_diff_eq!(mer_from_bler(5.25e-3, 20).unwrap(), 0.1, epsilon = 5e-4);
        assert_eq!(mer_from_bler(0.0, 37).unwrap(), 0.0);
        assert_abs_diff_eq!(mer_from_bler(1e-4, 100).unwrap(), 1e-2, epsilon = 1e-4);
        assert_eq!(mer_from_bler(1.0, 3).unwrap(), 1.0);
        assert!(mer_from_bler(1.2, 3).is_err());
        assert!(mer_from_bler(0.1, 0).is_err());
    }

    #[test]
    fn bler_for_mer_examples() {
        assert_abs_diff_eq!(bler_for_mer(1e-4, 20).unwrap(), 5.00e-6, epsilon = 5e-9);
        assert_abs_diff_eq!(bler_for_mer(1e-3, 50).unwrap(), 2.00e-5, epsilon = 5e-8);
        assert_abs_diff_eq!(bler_for_mer(0.5, 1).unwrap(), 0.5, epsilon = 1e-15);
        assert!(bler_for_mer(0.0, 1).is_err());
        assert!(bler_for_mer(1.0, 1).is_err());
    }

    #[test]
    fn round_trip() {
        for &m in &[1e-9, 1e-6, 1e-3, 0.1, 0.5, 0.9] {
            for &n in &[1usize, 2, 20, 50, 100, 1000] {
                let b = bler_for_mer(m, n).unwrap();
                assert_abs_diff_eq!(mer_from_bler(b, n).unwrap(), m, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mer_from_bler_is_increasing() {
        let mut last = 0.0;
        for i in 1..50 {
            let v = mer_from_bler(i as f64 / 100.0, 10).unwrap();
            assert!(v > last);
            last = v;
        }
        for n in 1..100 {
            assert!(mer_from_bler(0.01, n + 1).unwrap() > mer_from_bler(0.01, n).unwrap());
        }
    }

    #[test]
    fn chain_probabilities() {
        assert_eq!(p_swsc(1.0, 1.0, 17).unwrap(), 1.0);
        assert_abs_diff_eq!(p_swsc(0.99, 0.9, 3).unwrap(), 0.8019, epsilon = 1e-12);
        assert_abs_diff_eq!(p_swsc(0.7, 0.7, 5).unwrap(), 0.7f64.powi(5), epsilon = 1e-15);
        let strict = 0.99f64.powi(2) * 0.9f64.powi(8);
        assert_abs_diff_eq!(p_eswsc(0.99, 0.9, 10, 0.5).unwrap(), strict, epsilon = 1e-15);
        assert_abs_diff_eq!(strict, 0.421_900_9, epsilon = 1e-7);
        assert_abs_diff_eq!(p_eswsc_halves(0.99, 0.9, 10).unwrap(), strict, epsilon = 1e-15);
        assert_eq!(p_eswsc(0.8, 0.6, 9, 0.0).unwrap(), p_swsc(0.8, 0.6, 9).unwrap());
        assert!(p_eswsc(0.8, 0.6, 9, 0.6).is_err());
        assert!(p_swsc(-0.1, 0.6, 9).is_err());
    }

    #[test]
    fn two_chains_never_worse() {
        for &alpha in &[0.1, 0.2, 0.35, 0.5] {
            for n in 1..60 {
                for pc in (0..=20).map(|i| i as f64 / 20.0) {
                    for pa in (0..=20).map(|i| i as f64 / 20.0).filter(|&pa| pa <= pc) {
                        let e = p_eswsc(pc, pa, n, alpha).unwrap();
                        let s = p_swsc(pc, pa, n).unwrap();
                        assert!(e >= s * (1.0 - 1e-12), "alpha {alpha} n {n} pc {pc} pa {pa}");
                    }
                }
            }
        }
    }

    #[test]
    fn estimate_examples() {
        let e = estimate_mer(&[true; 100]).unwrap();
        assert_eq!(e.mer, 0.0);
        assert!(e.ci_high > 0.0 && e.ci_low == 0.0);
        let mut flags = vec![true; 1000];
        flags[..100].iter_mut().for_each(|f| *f = false);
        let e = estimate_mer(&flags).unwrap();
        assert_eq!(e.mer, 0.1);
        // independent evaluation of the Wilson formula for 100/1000
        assert_abs_diff_eq!(e.ci_low, 0.083_0, epsilon = 5e-4);
        assert_abs_diff_eq!(e.ci_high, 0.120_1, epsilon = 5e-4);
        let e = estimate_mer(&[false; 7]).unwrap();
        assert_eq!(e.mer, 1.0);
        assert_eq!(e.ci_high, 1.0);
        assert!(estimate_mer(&[]).is_err());
    }

    #[test]
    fn interval_ordering() {
        for trials in [1u64, 2, 10, 250, 20_000] {
            for failures in 0..=trials.min(50) {
                let e = MerEstimate::from_counts(failures, trials).unwrap();
                assert!(0.0 <= e.ci_low && e.ci_low <= e.mer && e.mer <= e.ci_high && e.ci_high <= 1.0);
            }
        }
    }
}
