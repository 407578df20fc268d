//! One-parameter sweeps over an experiment configuration.

use std::fmt;
use std::str::FromStr;

use crate::config::{CodeRate, ExperimentConfig};
use crate::runner::run_experiment;
use crate::{Error, ResultRow, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    SnrDb,
    K,
    N,
    Alpha,
    CodeRate,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::SnrDb => "snr_db",
            SweepParam::K => "k",
            SweepParam::N => "N",
            SweepParam::Alpha => "alpha",
            SweepParam::CodeRate => "code_rate",
        }
    }

    /// Returns `base` with this parameter set to `value`, validated.
    pub fn apply(self, base: &ExperimentConfig, value: &str) -> Result<ExperimentConfig> {
        let bad = || Error::Config(format!("invalid value `{value}` for {}", self.name()));
        let v = value.trim();
        let mut cfg = base.clone();
        match self {
            SweepParam::SnrDb => cfg.snr_db = v.parse().map_err(|_| bad())?,
            SweepParam::K => cfg.k = v.parse().map_err(|_| bad())?,
            SweepParam::N => cfg.n_packets = v.parse().map_err(|_| bad())?,
            SweepParam::Alpha => cfg.alpha = v.parse().map_err(|_| bad())?,
            SweepParam::CodeRate => cfg.code_rate = v.parse::<CodeRate>()?,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "snr_db" | "snr" => SweepParam::SnrDb,
            "k" => SweepParam::K,
            "N" | "n" | "n_packets" => SweepParam::N,
            "alpha" => SweepParam::Alpha,
            "code_rate" | "rate" => SweepParam::CodeRate,
            _ => {
                return Err(Error::Config(format!(
                    "unknown sweep parameter `{s}` (expected snr_db, k, N, alpha or code_rate)"
                )))
            }
        })
    }
}

/// Splits `"a,b,c"` into values, rejecting empty lists and empty items.
pub fn parse_values(list: &str) -> Result<Vec<String>> {
    let values: Vec<String> = list.split(',').map(|s| s.trim().to_string()).collect();
    if values.iter().any(String::is_empty) {
        return Err(Error::Config(format!("empty value in list `{list}`")));
    }
    Ok(values)
}

/// Runs the experiment once per value. Every value is validated before the
/// first trial starts.
pub fn run_sweep(base: &ExperimentConfig, param: SweepParam, values: &[String]) -> Result<Vec<ResultRow>> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let configs = values
        .iter()
        .map(|v| param.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (cfg, value) in configs.iter().zip(values) {
        for mut row in run_experiment(cfg)? {
            row.swept_param = param.name().to_string();
            row.value = value.clone();
            rows.push(row);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_apply() {
        let base = ExperimentConfig::default();
        let p: SweepParam = "N".parse().unwrap();
        assert_eq!(p.apply(&base, "20").unwrap().n_packets, 20);
        let p: SweepParam = "code_rate".parse().unwrap();
        assert_eq!(p.apply(&base, "456").unwrap().code_rate, CodeRate::new(456, 1024).unwrap());
        assert_eq!(p.apply(&base, "1/3").unwrap().code_rate, CodeRate::new(1, 3).unwrap());
        assert!(SweepParam::Alpha.apply(&base, "0.7").is_err());
        assert!(SweepParam::SnrDb.apply(&base, "loud").is_err());
        assert!("gain".parse::<SweepParam>().is_err());
    }

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("20, 50,100").unwrap(), ["20", "50", "100"]);
        assert!(parse_values("1,,2").is_err());
        assert!(parse_values("").is_err());
    }

    #[test]
    fn invalid_value_stops_before_running() {
        let base = ExperimentConfig::default();
        let values = parse_values("0.2,0.9").unwrap();
        assert!(run_sweep(&base, SweepParam::Alpha, &values).is_err());
    }
}
