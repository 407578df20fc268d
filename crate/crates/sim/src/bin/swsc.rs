use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use swsc_sim::sweep::parse_values;
use swsc_sim::{emit_results, run_experiment, run_sweep, ExperimentConfig, ResultRow, Scheme, SweepParam};

#[derive(Parser)]
#[command(name = "swsc", version, about = "Sliding window superposition coding link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration for every selected scheme.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Run the configuration once per value of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// snr_db, k, N, alpha or code_rate
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values, e.g. `20,50,100` or `456,460,1/2`
        #[arg(long)]
        values: String,
    },
}

#[derive(Args)]
struct Common {
    /// TOML configuration; missing keys take their defaults
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Give every scheme identical payloads and noise per trial
    #[arg(long)]
    pair_noise: bool,
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated subset of swsc, eswsc, ldpc_stacked, mldpc
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if self.pair_noise {
            cfg.pair_noise = true;
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        if let Some(s) = &self.schemes {
            cfg.schemes = s.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn finish(rows: &[ResultRow], cfg: &ExperimentConfig, common: &Common) -> Result<()> {
    let files = emit_results(rows, &common.out).with_context(|| format!("writing to {}", common.out.display()))?;
    std::fs::write(common.out.join("run_config.toml"), cfg.to_toml_string())?;
    for r in rows {
        println!(
            "{:<13} {:>8} {:>8}  mer {:.3e} [{:.3e}, {:.3e}]  bler {:.3e}  predicted {:.3e}  blocks {}",
            r.scheme.name(),
            r.swept_param,
            r.value,
            r.estimate.mer,
            r.estimate.ci_low,
            r.estimate.ci_high,
            r.bler,
            r.predicted_mer,
            r.blocks_sent
        );
    }
    info!("wrote {}", files.results.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run { common } => {
            let cfg = common.config()?;
            let rows = run_experiment(&cfg)?;
            finish(&rows, &cfg, &common)
        }
        Command::Sweep { common, param, values } => {
            let cfg = common.config()?;
            let values = parse_values(&values)?;
            let rows = run_sweep(&cfg, param, &values)?;
            finish(&rows, &cfg, &common)
        }
    }
}
