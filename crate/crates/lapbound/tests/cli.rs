use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lapbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lapbound")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_spectrum_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("c4.txt");
    let out = lapbound(&["gen", "--family", "cycle", "--size", "4", "--out", s(&graph)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(fs::read_to_string(&graph).unwrap().starts_with("4 4\n"));
    let out = lapbound(&["spectrum", "--graph", s(&graph)]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    // C4: 0, 2, 2, 4
    for (got, want) in values.iter().zip([0.0, 2.0, 2.0, 4.0]) {
        assert!((got - want).abs() < 1e-9);
    }
}

#[test]
fn spread_reports_small_gap_on_single_edge() {
    let out = lapbound(&["spread", "--family", "path", "--size", "2", "--r", "2"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["epsilon"].as_f64().unwrap() - 2f64.sqrt() / 4.0).abs() < 1e-9);
    assert!(v["gap"].as_f64().unwrap() <= 1e-2);
}

#[test]
fn certify_verify_round_trip_and_tamper_detection() {
    let dir = tempfile::tempdir().unwrap();
    let certs = dir.path().join("certs.json");
    let graph = ["--family", "grid", "--size", "12"];
    let mut args = vec!["certify"];
    args.extend(graph);
    args.extend(["--k-min", "2", "--k-max", "3", "--exact", "--out", s(&certs)]);
    assert_eq!(code(&lapbound(&args)), 0);

    let mut verify = vec!["verify"];
    verify.extend(graph);
    verify.extend(["--certificate", s(&certs), "--exact"]);
    let out = lapbound(&verify);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));

    let mut value: Value = serde_json::from_str(&fs::read_to_string(&certs).unwrap()).unwrap();
    value[0]["certified_bound"] = Value::from(1e-6);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, value.to_string()).unwrap();
    let mut verify = vec!["verify"];
    verify.extend(graph);
    verify.extend(["--certificate", s(&bad)]);
    let out = lapbound(&verify);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL ratios_match"));
}

#[test]
fn experiment_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "3")] {
        let out_dir = dir.path().join(run);
        let out = lapbound(&[
            "experiment", "--family", "grid", "--size", "8", "--k-min", "1", "--k-max", "6", "--threads", threads,
            "--out", s(&out_dir),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out_dir.join("scaling.svg").exists());
        texts.push(fs::read(out_dir.join("results.csv")).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let text = String::from_utf8(texts.pop().unwrap()).unwrap();
    assert!(text.starts_with("family,n,k,lambda_exact,cert_bound,epsilon,beta,dual_value,gap,flags\n"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn flow_report_with_rounding_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    // 2x3 grid: 0-1-2 over 3-4-5
    fs::write(&graph, "6 7\n0 1\n1 2\n3 4\n4 5\n0 3\n1 4\n2 5\n").unwrap();
    let flow = dir.path().join("f.txt");
    fs::write(&flow, "# unit flow 0 -> 5 split in two, 2 -> 3 direct\n0.5 0 1 2 5\n0.5 0 3 4 5\n1 2 1 4 3\n").unwrap();
    let subsets = dir.path().join("mu.txt");
    fs::write(&subsets, "1 0 2 3 5\n").unwrap();
    let out = lapbound(&[
        "flow", "--graph", s(&graph), "--flow", s(&flow), "--subsets", s(&subsets), "--round", "200",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    // 2-1-4-3 shares two vertices with each half; ordered pairs count twice
    assert!((v["inter"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert!(v["rounding"]["min_inter"].as_f64().unwrap() <= 4.0);
    assert_eq!(v["mu_flow"]["valid"], Value::Bool(false));
    assert!(v["bounds"]["subset_flow_lower"].as_f64().unwrap() >= 0.0);
}

#[test]
fn bad_inputs_map_to_validation_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    fs::write(&graph, "3 2\n0 1\n1 7\n").unwrap();
    let out = lapbound(&["spectrum", "--graph", s(&graph)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3:"));

    assert_eq!(code(&lapbound(&["spectrum", "--family", "hypercube", "--size", "3"])), 1);
    assert_eq!(code(&lapbound(&["spectrum"])), 1);
    assert_eq!(code(&lapbound(&["certify", "--family", "path", "--size", "8", "--k-min", "3", "--k-max", "2"])), 1);
    let missing = dir.path().join("missing.txt");
    assert_eq!(code(&lapbound(&["spectrum", "--graph", s(&missing)])), 1);
    let empty = dir.path().join("empty");
    let out = lapbound(&["experiment", "--graph", s(&graph), "--k-min", "1", "--k-max", "1", "--out", s(&empty)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn help_exits_cleanly() {
    let out = lapbound(&["--help"]);
    assert_eq!(code(&out), 0);
    for sub in ["gen", "spectrum", "spread", "flow", "certify", "verify", "experiment"] {
        assert!(String::from_utf8_lossy(&out.stdout).contains(sub));
    }
}
