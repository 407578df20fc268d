use std::fs;
use std::process::Command;

fn swsc() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_swsc"));
    c.env("RUST_LOG", "warn");
    c
}

const CONFIG: &str = r#"
schemes = ["swsc", "eswsc"]
k = 100
code_rate = "1/2"
n_packets = 6
snr_db = 9.0
trials = 40
"#;

#[test]
fn run_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let out = dir.path().join("out");
    let status = swsc()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--seed", "5", "--trials", "25", "--workers", "2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("swsc,,,25,"));
    assert!(lines[1].ends_with(",5"));
    assert!(out.join("plot_mer.py").exists());
    let echoed = fs::read_to_string(out.join("run_config.toml")).unwrap();
    assert!(echoed.contains("beta = 0.8"));
}

#[test]
fn sweep_over_packet_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = swsc()
        .args(["sweep", "--param", "N", "--values", "2,4", "--trials", "5", "--schemes", "mldpc,ldpc_stacked"])
        .args(["--pair-noise", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().nth(1).unwrap().starts_with("mldpc,N,2,5,"));
}

#[test]
fn bad_arguments_fail() {
    let bad = [
        vec!["sweep", "--param", "gain", "--values", "1"],
        vec!["sweep", "--param", "alpha", "--values", "0.9", "--trials", "1"],
        vec!["run", "--schemes", "polar"],
        vec!["run", "--config", "/nonexistent/exp.toml"],
    ];
    for args in bad {
        let out = swsc().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
    }
}
