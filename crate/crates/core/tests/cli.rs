use std::path::PathBuf;
use std::process::{Command, Output};

fn pricelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pricelab")).args(args).output().unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pricelab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn last_revenue(csv: &str) -> f64 {
    csv.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap()
}

#[test]
fn simulate_static_uniform() {
    let out = pricelab(&["simulate", "--instance", "harmonic:n=4", "--strategy", "static-uniform:p=0.4", "--seed", "1"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("round,buyer_id,price_mode,price_or_min_price,units_bought,payment,utility,cumulative_revenue"));
    assert!((last_revenue(&csv) - 0.8).abs() < 1e-12);
}

#[test]
fn randomized_strategy_needs_seed() {
    let out = pricelab(&["simulate", "--instance", "harmonic:n=4", "--strategy", "dynamic-uniform"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = pricelab(&["simulate", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generated_file_replays_identically() {
    let path = tmp("inst.json");
    let p = path.to_str().unwrap();
    let out = pricelab(&["gen", "--instance", "random-xos:n=6,m=3,l=2,seed=4", "--out", p]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let file_spec = format!("file:{p}");
    let a = pricelab(&["simulate", "--instance", &file_spec, "--strategy", "dynamic-uniform", "--seed", "9", "--order", "random"]);
    let b = pricelab(&["simulate", "--instance", "random-xos:n=6,m=3,l=2,seed=4", "--strategy", "dynamic-uniform", "--seed", "9", "--order", "random"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_exit_codes() {
    let ok = pricelab(&["verify", "lemma-oracle", "--seeds", "20"]);
    assert_eq!(ok.status.code(), Some(0));
    let red = pricelab(&["verify", "hard-static-chain", "--k", "2"]);
    assert_eq!(red.status.code(), Some(1));
    let unknown = pricelab(&["verify", "no-such-suite"]);
    assert_ne!(unknown.status.code(), Some(0));
}

#[test]
fn ratio_rows() {
    let path = tmp("ratio.json");
    let out = pricelab(&[
        "ratio", "--instance", "random-xos:n=5,m=2", "--strategy", "dynamic-uniform", "--count", "3", "--seed", "1", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let ratio = r["ratio"].as_f64().unwrap();
        assert!(ratio >= 1.0 - 1e-9);
    }
}

#[test]
fn sweep_harmonic_and_empty() {
    let out = pricelab(&["sweep", "--instance", "harmonic:n=16", "--tie", "inclusive"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let max = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!((max - 1.0).abs() < 1e-12);
    let empty = pricelab(&["sweep", "--instance", "random-xos:n=3,m=1,density=0"]);
    assert!(empty.status.success(), "{}", String::from_utf8_lossy(&empty.stderr));
    assert_eq!(String::from_utf8(empty.stdout).unwrap().lines().count(), 1);
}
