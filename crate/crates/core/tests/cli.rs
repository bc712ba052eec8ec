use std::fs;
use std::process::Command;

use pego_lab::cli::run;
use pego_lab::diagnosis::SweepConfig;
use pego_lab::{FrequencyGrid, TimeGrid};
use sha2::{Digest, Sha256};
use tempfile::tempdir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pego-lab"))
}

fn argv(args: &[&str]) -> Vec<String> {
    std::iter::once("pego-lab").chain(args.iter().copied()).map(String::from).collect()
}

fn sha(path: &std::path::Path) -> Vec<u8> {
    Sha256::digest(fs::read(path).unwrap()).to_vec()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn diagnose_exp_scale_writes_compact_report() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("report.json");
    let code =
        run(argv(&["diagnose", "--family", "exp-scale", "--x", "0", "--eps", "1e-2", "--out", out.to_str().unwrap()]));
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema"], "pego-lab/1");
    assert_eq!(v["diagnosis"]["verdict"], "compact");
    assert_eq!(v["label"], "compact");
    // resolved config is embedded
    assert_eq!(v["config"]["grid"]["dt"], 1e-3);
    assert_eq!(v["config"]["sweep"]["time_tails"].as_array().unwrap().len(), 4);
    assert_eq!(v["config"]["members"], 11);
}

#[test]
fn verify_zero_has_zero_norms() {
    let o = bin().args(["verify", "--family", "zero", "--x", "0"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"][0]["l1"], 0.0);
    assert_eq!(v["result"][0]["l2"], 0.0);
}

#[test]
fn assert_compact_exit_codes() {
    let o = bin().args(["diagnose", "--family", "modulation-ray", "--x", "0", "--assert-compact"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["diagnose", "--family", "exp-single", "--assert-compact"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn configuration_errors_exit_one_with_distinct_messages() {
    let dir = tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"kind":"exponential","a":"#).unwrap();
    let cases: Vec<Vec<String>> = vec![
        argv(&["diagnose", "--family", "no-such-family"]),
        argv(&["diagnose", "--dsl", bad.to_str().unwrap()]),
        argv(&["sweep", "--family", "exp-scale", "--criterion", "exp-equicont", "--scales", "0.01,0.02"]),
        argv(&["sweep", "--family", "exp-scale", "--scales", "0.01"]),
        argv(&["diagnose", "--family", "exp-scale", "--x", "-1"]),
        argv(&["diagnose"]),
    ];
    let mut messages = Vec::new();
    for a in cases {
        let o = bin().args(&a[1..]).output().unwrap();
        assert_eq!(o.status.code(), Some(1), "{a:?}");
        let msg = String::from_utf8(o.stderr).unwrap();
        assert!(!msg.is_empty());
        assert!(!messages.contains(&msg), "duplicate message {msg}");
        messages.push(msg);
    }
    assert!(messages[0].contains("no-such-family"));
    assert!(messages[1].contains("malformed DSL"));
    assert!(messages[2].contains("strictly decreasing"));
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("missing").join("r.json");
    assert_eq!(run(argv(&["verify", "--family", "zero", "--out", out.to_str().unwrap()])), 1);
}

#[test]
fn plot_data_row_counts() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("plot.csv");
    let code = run(argv(&["diagnose", "--family", "exp-scale", "--format", "csv", "--out", out.to_str().unwrap()]));
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# columns:"));
    let rows = data_rows(&text);
    let sweep = SweepConfig::default();
    let n_scales =
        sweep.time_tails.len() + sweep.real_shifts.len() + sweep.time_shifts.len() + sweep.freq_cutoffs.len();
    assert_eq!(rows.iter().filter(|r| r.starts_with("sweep,")).count(), n_scales);
    let nodes = FrequencyGrid::for_time_grid(&TimeGrid::default()).len();
    assert_eq!(rows.iter().filter(|r| r.starts_with("spectrum,")).count(), nodes);
}

#[test]
fn custom_ladder_and_grids() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let code = run(argv(&[
        "sweep",
        "--family",
        "exp-single",
        "--criterion",
        "exp-equivanish",
        "--scales",
        "1,2,3",
        "--dt",
        "2e-3",
        "--t-max",
        "20",
        "--dy",
        "0.5",
        "--y-max",
        "50",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.iter().filter(|r| r.starts_with("sweep,exp-equivanish,")).count(), 3);
    assert_eq!(
        rows.iter().filter(|r| r.starts_with("spectrum,")).count(),
        FrequencyGrid::new(0.5, 50.0).unwrap().len()
    );
    // e^{-2T}: tail of ||e^{-t}||^2 past T = 3
    let last: f64 = rows[2].rsplit(',').next().unwrap().parse().unwrap();
    assert!((last - (-6.0f64).exp() / 2.0).abs() < 1e-5, "{last}");
}

#[test]
fn dsl_inputs() {
    let dir = tempdir().unwrap();
    let one = dir.path().join("one.json");
    fs::write(&one, r#"{"kind":"exponential","a":2}"#).unwrap();
    let many = dir.path().join("many.json");
    fs::write(&many, r#"[{"kind":"exponential","a":1},{"kind":"indicator","a":0,"b":1}]"#).unwrap();
    let fam = dir.path().join("fam.json");
    fs::write(
        &fam,
        r#"{"name":"scaled","template":{"kind":"exponential","a":"$p"},"parameters":[1,1.5,2],"order":0.5}"#,
    )
    .unwrap();
    for (path, members) in [(&one, 1), (&many, 2), (&fam, 3)] {
        let o = bin().args(["verify", "--dsl", path.to_str().unwrap()]).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["config"]["members"], members);
    }
    let o = bin().args(["verify", "--dsl", one.to_str().unwrap()]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["result"][0]["l2"].as_f64().unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn every_command_runs_in_both_formats() {
    for cmd in ["verify", "transform", "criteria", "diagnose", "chains", "sweep"] {
        for fmt in ["json", "csv"] {
            let o = bin().args([cmd, "--family", "indicator-set", "--format", fmt]).output().unwrap();
            assert_eq!(o.status.code(), Some(0), "{cmd} {fmt}: {}", String::from_utf8_lossy(&o.stderr));
            let text = String::from_utf8(o.stdout).unwrap();
            match fmt {
                "json" => {
                    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
                    assert_eq!(v["schema"], "pego-lab/1");
                }
                _ => assert!(text.starts_with("# columns:"), "{cmd}"),
            }
        }
    }
}

#[test]
fn transform_csv_has_one_row_per_node_and_member() {
    let o = bin()
        .args(["transform", "--family", "indicator-set", "--dy", "0.5", "--y-max", "20", "--format", "csv"])
        .output()
        .unwrap();
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(data_rows(&text).len(), 12 * FrequencyGrid::new(0.5, 20.0).unwrap().len());
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempdir().unwrap();
    let mut hashes = Vec::new();
    for (i, threads) in ["1", "4", "4"].iter().enumerate() {
        for (cmd, fmt) in [("diagnose", "json"), ("diagnose", "csv"), ("chains", "json")] {
            let out = dir.path().join(format!("{cmd}-{fmt}-{i}"));
            let o = bin()
                .args([cmd, "--seed", "1", "--size", "20", "--format", fmt, "--out", out.to_str().unwrap()])
                .env("PEGO_LAB_THREADS", threads)
                .output()
                .unwrap();
            assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
            hashes.push(((cmd, fmt), sha(&out)));
        }
    }
    for chunk in hashes.chunks(3).skip(1) {
        assert_eq!(chunk, &hashes[..3]);
    }
}

#[test]
fn zero_threads_is_rejected() {
    let o = bin().args(["verify", "--family", "zero", "--threads", "0"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}
