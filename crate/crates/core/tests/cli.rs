mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::*;
use num_complex::Complex64;
use otfs::cli::{
    mimo_channel_from_json, parse_complex_pairs, parse_matrix_entries_csv, ResultRecord,
};
use otfs::otfs::OtfsFrameConfig;
use serde_json::{json, Value};
use tempfile::TempDir;

fn otfs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otfs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

/// Runs a subcommand with `--config` and `--out`, returning the output dir.
fn run_mode(
    dir: &TempDir,
    mode: &str,
    cfg: &Value,
    extra: &[&str],
) -> (Output, std::path::PathBuf) {
    let config = write_config(dir.path(), &format!("{mode}.json"), cfg);
    let out = dir
        .path()
        .join(format!("out-{mode}-{}", extra.join("_").replace('-', "")));
    let out_str = out.to_string_lossy().into_owned();
    let mut args = vec![mode, "--config", &config, "--out", &out_str];
    args.extend_from_slice(extra);
    (otfs(&args), out)
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// `(record, sigma2, capacity, ofdm_capacity)` of each aggregate row.
fn aggregate_rows(csv: &str) -> Vec<(f64, f64, f64)> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(ResultRecord::HEADER));
    lines
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|f| f[0] == "aggregate")
        .map(|f| {
            (
                f[3].parse().unwrap(),
                f[6].parse().unwrap(),
                f[7].parse().unwrap(),
            )
        })
        .collect()
}

fn identity_capacity(m: usize, n: usize, snr_db: Vec<f64>) -> Value {
    json!({
        "frame": { "m": m, "n": n, "cp": 0 },
        "channel": { "kind": "identity" },
        "noise": { "snr_db": snr_db },
        "run": { "trials": 1, "seed": 1 }
    })
}

fn random_mimo(trials: usize) -> Value {
    json!({
        "frame": { "m": 4, "n": 2, "cp": 1 },
        "mimo": { "n_t": 2, "n_r": 2 },
        "channel": { "kind": "random", "taps": 2, "paths": 2, "max_doppler": 0.05 },
        "noise": { "snr_db": [0.0, 10.0] },
        "run": { "trials": trials, "seed": 42, "export_channels": true, "per_trial": true }
    })
}

#[test]
fn identity_channel_gives_one_bit_per_sample_at_zero_db() {
    let dir = TempDir::new().unwrap();
    let (out, path) = run_mode(&dir, "capacity", &identity_capacity(8, 4, vec![0.0]), &[]);
    assert_ok(&out);
    let rows = aggregate_rows(&fs::read_to_string(path.join("results.csv")).unwrap());
    assert_eq!(rows.len(), 1);
    assert!((rows[0].1 - 1.0).abs() <= 1e-9, "{rows:?}");
    assert!((rows[0].2 - 1.0).abs() <= 1e-9, "{rows:?}");
}

#[test]
fn sweep_rows_are_monotone_in_snr() {
    let dir = TempDir::new().unwrap();
    let (out, path) = run_mode(
        &dir,
        "capacity",
        &identity_capacity(4, 2, vec![-5.0, 0.0, 5.0]),
        &[],
    );
    assert_ok(&out);
    let rows = aggregate_rows(&fs::read_to_string(path.join("results.csv")).unwrap());
    assert_eq!(rows.len(), 3);
    for w in rows.windows(2) {
        assert!(w[1].0 < w[0].0);
        assert!(w[1].1 > w[0].1);
    }
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(path.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["results"].as_array().unwrap().len(), 3);
}

#[test]
fn exported_channels_reproduce_capacity() {
    let dir = TempDir::new().unwrap();
    let trials = 12;
    let (out, path) = run_mode(&dir, "capacity", &random_mimo(trials), &[]);
    assert_ok(&out);
    let frame = OtfsFrameConfig::new(4, 2, 1).unwrap();
    let ones = vec![c(1.0, 0.0); frame.grid_len()];
    let ks: Vec<_> = (0..trials)
        .map(|t| {
            let text =
                fs::read_to_string(path.join(format!("channels/trial-{t:05}.json"))).unwrap();
            let ch = mimo_channel_from_json(&text).unwrap();
            mimo_k_oracle(ch.pairs(), 2, 2, &ones, &frame)
        })
        .collect();
    let rows = aggregate_rows(&fs::read_to_string(path.join("results.csv")).unwrap());
    assert_eq!(rows.len(), 2);
    for (sigma2, capacity, _) in rows {
        let mean = ks.iter().map(|k| mi_oracle(k, sigma2)).sum::<f64>() / trials as f64;
        let expected = mean / (frame.n * frame.symbol_len()) as f64;
        assert!(
            (capacity - expected).abs() <= 1e-9 * expected.max(1.0),
            "{capacity} vs {expected}"
        );
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let (a, pa) = run_mode(&dir, "capacity", &random_mimo(9), &["--threads", "1"]);
    let (b, pb) = run_mode(&dir, "capacity", &random_mimo(9), &["--threads", "3"]);
    assert_ok(&a);
    assert_ok(&b);
    for file in ["results.csv", "summary.json", "channels/trial-00008.json"] {
        assert_eq!(
            fs::read(pa.join(file)).unwrap(),
            fs::read(pb.join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn embedded_config_reruns_identically() {
    let dir = TempDir::new().unwrap();
    let (out, first) = run_mode(
        &dir,
        "capacity",
        &random_mimo(3),
        &["--trials", "4", "--seed", "9"],
    );
    assert_ok(&out);
    let saved = first.join("config.json");
    let second = dir.path().join("rerun");
    let out = otfs(&[
        "capacity",
        "--config",
        saved.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let csv = fs::read_to_string(first.join("results.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(&format!(
        ",4,9,{}",
        csv.lines().nth(1).unwrap().rsplit(',').next().unwrap()
    )));
    assert_eq!(csv, fs::read_to_string(second.join("results.csv")).unwrap());
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = TempDir::new().unwrap();
    let mut bad = identity_capacity(4, 2, vec![0.0]);
    bad["frame"]["bogus"] = json!(1);
    let (out, _) = run_mode(&dir, "capacity", &bad, &[]);
    assert_eq!(out.status.code(), Some(2));

    let mut no_noise = identity_capacity(4, 2, vec![0.0]);
    no_noise.as_object_mut().unwrap().remove("noise");
    let (out, _) = run_mode(&dir, "capacity", &no_noise, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    let missing = otfs(&[
        "capacity",
        "--config",
        dir.path().join("absent.json").to_str().unwrap(),
    ]);
    assert_ne!(missing.status.code(), Some(0));
}

#[test]
fn short_prefix_fails_verify_with_code_three() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "frame": { "m": 8, "n": 4, "cp": 1 },
        "channel": { "kind": "static-multipath", "gains": [[1.0, 0.0], [0.5, 0.0], [0.25, 0.0]], "delays": [0, 1, 2] }
    });
    let (out, path) = run_mode(&dir, "verify", &cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
    let report: Value =
        serde_json::from_str(&fs::read_to_string(path.join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["all_passed"], json!(false));
}

#[test]
fn default_verify_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "frame": { "m": 8, "n": 4, "cp": 2 },
        "mimo": { "n_t": 2, "n_r": 2 },
        "channel": { "kind": "random", "taps": 3, "paths": 3, "max_doppler": 0.1 },
        "noise": { "snr_db": [10.0] }
    });
    let (out, path) = run_mode(&dir, "verify", &cfg, &[]);
    assert_ok(&out);
    let report: Value =
        serde_json::from_str(&fs::read_to_string(path.join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["all_passed"], json!(true));
    assert!(String::from_utf8_lossy(&out.stdout)
        .lines()
        .any(|l| l.starts_with("PASS")));
}

#[test]
fn dense_cap_exits_with_code_four() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "frame": { "m": 8, "n": 4, "cp": 0 },
        "channel": { "kind": "identity" },
        "run": { "dense_cap": 100 }
    });
    let (out, _) = run_mode(&dir, "effective-channel", &cfg, &[]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn simulate_identity_recovers_symbols() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "frame": { "m": 8, "n": 4, "cp": 1 },
        "channel": { "kind": "identity" },
        "run": { "seed": 5 }
    });
    let (out, path) = run_mode(&dir, "simulate", &cfg, &[]);
    assert_ok(&out);
    let t: Value =
        serde_json::from_str(&fs::read_to_string(path.join("transcript.json")).unwrap()).unwrap();
    let pairs = |key: &str| parse_complex_pairs(&t["stages"][key].to_string()).unwrap();
    let (d, d_hat) = (pairs("d"), pairs("d_hat"));
    assert_eq!(d.len(), 32);
    assert!(max_diff(&d, &d_hat) <= 1e-10);
    assert!(t["residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn zero_symbols_give_zero_output() {
    let dir = TempDir::new().unwrap();
    let symbols = dir.path().join("zeros.json");
    fs::write(
        &symbols,
        serde_json::to_string(&vec![[0.0, 0.0]; 16]).unwrap(),
    )
    .unwrap();
    let cfg = json!({
        "frame": { "m": 4, "n": 2, "cp": 1 },
        "mimo": { "n_t": 2, "n_r": 1 },
        "channel": { "kind": "random", "taps": 2, "paths": 2 },
        "run": { "symbols": symbols.to_str().unwrap() }
    });
    let (out, path) = run_mode(&dir, "simulate", &cfg, &[]);
    assert_ok(&out);
    let t: Value =
        serde_json::from_str(&fs::read_to_string(path.join("transcript.json")).unwrap()).unwrap();
    let d_hat = parse_complex_pairs(&t["stages"]["d_hat"].to_string()).unwrap();
    assert_eq!(d_hat.len(), 8);
    assert!(d_hat.iter().all(|z| *z == Complex64::new(0.0, 0.0)));

    fs::write(
        &symbols,
        serde_json::to_string(&vec![[0.0, 0.0]; 15]).unwrap(),
    )
    .unwrap();
    let (out, _) = run_mode(&dir, "simulate", &cfg, &["--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identity_effective_channel_is_identity() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "frame": { "m": 4, "n": 3, "cp": 1 },
        "channel": { "kind": "identity" }
    });
    let (out, path) = run_mode(&dir, "effective-channel", &cfg, &[]);
    assert_ok(&out);
    let e = parse_matrix_entries_csv(
        &fs::read_to_string(path.join("effective_dd.csv")).unwrap(),
        12,
        12,
    )
    .unwrap();
    assert!(e.max_abs_diff(&eye(12)) <= 1e-12);
}

#[test]
fn time_invariant_channel_is_block_circulant() {
    let dir = TempDir::new().unwrap();
    let (m, n) = (4, 3);
    let cfg = json!({
        "frame": { "m": m, "n": n, "cp": 1 },
        "channel": { "kind": "static-multipath", "gains": [[0.8, 0.1], [-0.3, 0.4]], "delays": [0, 1] },
        "run": { "frequency_domain": true }
    });
    let (out, path) = run_mode(&dir, "effective-channel", &cfg, &[]);
    assert_ok(&out);
    let e = parse_matrix_entries_csv(
        &fs::read_to_string(path.join("effective_dd.csv")).unwrap(),
        m * n,
        m * n,
    )
    .unwrap();
    // I_N ⊗ C with C the circulant of the taps in delay
    let taps = [c(0.8, 0.1), c(-0.3, 0.4), c(0.0, 0.0), c(0.0, 0.0)];
    let circ = otfs::linalg::ComplexMatrix::from_fn(m, m, |i, j| taps[(i + m - j) % m]);
    assert!(e.max_abs_diff(&kron(&eye(n), &circ)) <= 1e-12);
    assert!(path.join("effective_tf.csv").exists());
}

#[test]
fn schema_prints_json() {
    let out = otfs(&["schema"]);
    assert_ok(&out);
    let schema: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(schema["properties"]["frame"].is_object());
}
