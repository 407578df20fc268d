//! Result files: `results.csv`, a timing sidecar and a plotting script.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::{Error, ResultRow, Result};

pub const RESULTS_HEADER: [&str; 13] = [
    "scheme",
    "swept_param",
    "value",
    "trials",
    "failures",
    "mer",
    "ci_low",
    "ci_high",
    "bler",
    "p_clean",
    "p_assumed",
    "predicted_mer",
    "seed",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the rows as CSV. Wall time is left out so that the file depends
/// only on the configuration and seed.
pub fn write_results_csv(rows: &[ResultRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for r in rows {
        let e = &r.estimate;
        w.write_record([
            r.scheme.to_string(),
            r.swept_param.clone(),
            r.value.clone(),
            e.trials.to_string(),
            e.failures.to_string(),
            e.mer.to_string(),
            e.ci_low.to_string(),
            e.ci_high.to_string(),
            r.bler.to_string(),
            opt(r.p_clean),
            opt(r.p_assumed),
            r.predicted_mer.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_timing_csv(rows: &[ResultRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scheme", "swept_param", "value", "blocks_sent", "wall_time_s"])?;
    for r in rows {
        w.write_record([
            r.scheme.to_string(),
            r.swept_param.clone(),
            r.value.clone(),
            r.blocks_sent.to_string(),
            format!("{:.3}", r.wall_time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plot MER against the swept parameter from results.csv (one figure per parameter)."""
import csv
import sys
from collections import defaultdict
from fractions import Fraction
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
path = Path(sys.argv[1]) if len(sys.argv) > 1 else here / "results.csv"

groups = defaultdict(lambda: defaultdict(list))
with open(path, newline="") as f:
    for row in csv.DictReader(f):
        value = row["value"]
        x = float(Fraction(value)) if value else 0.0
        groups[row["swept_param"] or "single"][row["scheme"]].append(
            (x, float(row["mer"]), float(row["ci_low"]), float(row["ci_high"]))
        )

for param, schemes in groups.items():
    fig, ax = plt.subplots(figsize=(6, 4))
    for scheme, points in sorted(schemes.items()):
        points = sorted(p for p in points if p[1] > 0)
        if not points:
            continue
        xs, mer, lo, hi = zip(*points)
        err = [[m - l for m, l in zip(mer, lo)], [h - m for m, h in zip(mer, hi)]]
        ax.errorbar(xs, mer, yerr=err, marker="o", capsize=3, label=scheme)
    ax.set_yscale("log")
    ax.set_xlabel(param)
    ax.set_ylabel("MER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path.parent / f"mer_vs_{param}.png", dpi=150)
    print(f"wrote {path.parent / f'mer_vs_{param}.png'}")
"#;

/// Files written by [`emit_results`].
#[derive(Debug, Clone)]
pub struct EmittedFiles {
    pub results: PathBuf,
    pub timing: PathBuf,
    pub plot_script: PathBuf,
}

pub fn emit_results(rows: &[ResultRow], out_dir: &Path) -> Result<EmittedFiles> {
    if rows.is_empty() {
        return Err(Error::Config("no result rows to write".into()));
    }
    fs::create_dir_all(out_dir)?;
    let files = EmittedFiles {
        results: out_dir.join("results.csv"),
        timing: out_dir.join("timing.csv"),
        plot_script: out_dir.join("plot_mer.py"),
    };
    write_results_csv(rows, fs::File::create(&files.results)?)?;
    write_timing_csv(rows, fs::File::create(&files.timing)?)?;
    fs::write(&files.plot_script, PLOT_SCRIPT)?;
    Ok(files)
}
