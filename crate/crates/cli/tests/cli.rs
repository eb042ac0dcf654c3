//! End-to-end checks of the `qram` binary: exit codes, format parity,
//! determinism, and agreement of emitted reports with the library oracle.

use std::path::Path;
use std::process::{Command, Output};

fn qram(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qram"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn invalid_width_exits_2() {
    let out = qram(&["call", "--n", "0", "--arch", "bucket"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_2() {
    let out = qram(&["call", "--n", "2", "--arch", "bucket", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn capacity_refusal_exits_1_and_force_overrides() {
    let out = qram(&["call", "--n", "13", "--arch", "bucket"]);
    assert_eq!(out.status.code(), Some(1));

    let out = qram(&[
        "noise-sweep",
        "--arch",
        "bucket",
        "--n",
        "13",
        "--trials",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));

    let out = qram(&[
        "call",
        "--n",
        "5",
        "--arch",
        "bucket",
        "--quantum-memory",
        "--mode",
        "swap",
    ]);
    assert_eq!(out.status.code(), Some(1), "quantum-memory cap is 4");
}

#[test]
fn basis_call_reports_the_addressed_cell() {
    let out = qram(&[
        "call",
        "--arch",
        "fanout",
        "--n",
        "2",
        "--memory",
        "zeros",
        "--address",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let state = report["final_state"].as_array().unwrap();
    assert_eq!(state.len(), 1);
    assert_eq!(state[0]["configuration"]["q"], "01");
    assert_eq!(state[0]["configuration"]["a"], "0");
    assert_eq!(state[0]["re"].as_f64().unwrap(), 1.0);
}

/// The emitted final state must match the library's ideal memory call.
#[test]
fn uniform_call_matches_the_oracle() {
    let out = qram(&[
        "call",
        "--arch",
        "bucket",
        "--n",
        "3",
        "--memory",
        "random",
        "--seed",
        "7",
        "--address",
        "uniform",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();

    let n = 3usize;
    let memory = qram_core::MemoryArray::random(n, 1, 7).unwrap();
    let reported_cells: Vec<u64> = report["memory"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(reported_cells, memory.cells());

    let amp = num_complex::Complex64::new(1.0 / (8f64).sqrt(), 0.0);
    let terms: Vec<(u64, num_complex::Complex64)> = (0..8).map(|k| (k, amp)).collect();
    let input = qram_core::make_address_state(n, &terms).unwrap();
    let expected =
        qram_core::ideal_qram_oracle(&input, &memory, qram_core::AccessMode::Copy).unwrap();
    let expected_dump: serde_json::Value = serde_json::from_str(&expected.dump_json()).unwrap();
    assert_eq!(report["final_state"], expected_dump);
}

#[test]
fn counts_match_closed_forms() {
    let out = qram(&["counts", "--n-max", "5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let body = stdout(&out);
    let mut lines = body.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,fanout_total,fanout_activated,modified_activated,bucket_active,bucket_waiting"
    );
    for (i, line) in lines.enumerate() {
        let n = (i + 1) as u64;
        let fields: Vec<u64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields[0], n);
        assert_eq!(fields[1], 2 * ((1 << n) - 1));
        assert_eq!(fields[2], (1 << n) - 1);
        assert_eq!(fields[3], 2 * n + 1);
        assert_eq!(fields[4], n);
        assert_eq!(fields[5], (1 << n) - (n + 1));
    }
}

#[test]
fn counts_2d_geometry() {
    let out = qram(&[
        "counts",
        "--geometry",
        "2d",
        "--n-max",
        "10",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let body = stdout(&out);
    let last = body.lines().last().unwrap();
    assert_eq!(last, "10,1023,62");
}

#[test]
fn zero_epsilon_sweep_never_fails() {
    let out = qram(&[
        "noise-sweep",
        "--epsilon",
        "0",
        "--trials",
        "100",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    for line in stdout(&out).lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[4], "0", "nonzero failure rate in {line}");
    }
}

/// Fanout failure rates dominate bucket-brigade rates in every row of a
/// two-architecture sweep.
#[test]
fn sweep_shows_fanout_dominance() {
    let out = qram(&[
        "noise-sweep",
        "--arch",
        "both",
        "--epsilon",
        "0.01",
        "--n",
        "2..6",
        "--trials",
        "400",
        "--seed",
        "3",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&out)).unwrap();
    for n in 2..=6u64 {
        let rate = |arch: &str| {
            rows.iter()
                .find(|r| r["architecture"] == arch && r["n"] == n)
                .unwrap()["fail_rate"]
                .as_f64()
                .unwrap()
        };
        assert!(
            rate("fanout") >= rate("bucket-brigade"),
            "dominance violated at n={n}"
        );
    }
}

#[test]
fn runs_are_deterministic_given_seeds() {
    let args = [
        "noise-sweep",
        "--arch",
        "bucket",
        "--epsilon",
        "0.02",
        "--n",
        "6",
        "--trials",
        "500",
        "--seed",
        "11",
    ];
    let a = qram(&args);
    let b = qram(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

/// JSON and CSV outputs of the same run contain identical numbers.
#[test]
fn json_and_csv_agree() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("sweep");
    let out = qram(&[
        "noise-sweep",
        "--arch",
        "bucket",
        "--epsilon",
        "0.05",
        "--n",
        "4",
        "--trials",
        "300",
        "--seed",
        "5",
        "--format",
        "both",
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: Vec<serde_json::Value> =
        serde_json::from_str(&std::fs::read_to_string(base.with_extension("json")).unwrap())
            .unwrap();
    let csv = std::fs::read_to_string(base.with_extension("csv")).unwrap();
    let lines: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(json.len(), lines.len());
    for (row, line) in json.iter().zip(lines) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(
            fields[1].parse::<u64>().unwrap(),
            row["n"].as_u64().unwrap()
        );
        assert_eq!(
            fields[2].parse::<f64>().unwrap(),
            row["epsilon"].as_f64().unwrap()
        );
        assert_eq!(
            fields[4].parse::<f64>().unwrap(),
            row["fail_rate"].as_f64().unwrap()
        );
        assert_eq!(
            fields[5].parse::<f64>().unwrap(),
            row["ci_half"].as_f64().unwrap()
        );
        assert_eq!(
            fields[6].parse::<f64>().unwrap(),
            row["analytic"].as_f64().unwrap()
        );
    }
}

#[test]
fn out_dir_env_var_prefixes_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qram"))
        .args([
            "counts",
            "--n-max",
            "3",
            "--format",
            "csv",
            "--out",
            "table.csv",
        ])
        .env("QRAM_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("table.csv").exists());
}

#[test]
fn memory_files_load_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("mem.json");
    std::fs::write(&json_path, r#"{"n": 2, "d": 1, "cells": [1, 0, 0, 1]}"#).unwrap();
    let out = qram(&[
        "call",
        "--arch",
        "bucket",
        "--n",
        "2",
        "--memory",
        json_path.to_str().unwrap(),
        "--address",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["final_state"][0]["configuration"]["a"], "1");

    let flat_path = dir.path().join("mem.txt");
    std::fs::write(&flat_path, "1\n0\n0\n1\n").unwrap();
    let out = qram(&[
        "call",
        "--arch",
        "bucket",
        "--n",
        "2",
        "--memory",
        flat_path.to_str().unwrap(),
        "--address",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));

    let out = qram(&[
        "call",
        "--arch",
        "bucket",
        "--n",
        "3",
        "--memory",
        json_path.to_str().unwrap(),
        "--address",
        "0",
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "cell count mismatch must be rejected"
    );

    let missing = Path::new("/nonexistent/mem.json");
    let out = qram(&[
        "call",
        "--arch",
        "bucket",
        "--n",
        "2",
        "--memory",
        missing.to_str().unwrap(),
        "--address",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn swap_mode_requires_quantum_memory() {
    let out = qram(&[
        "call", "--arch", "bucket", "--n", "2", "--memory", "random", "--mode", "swap",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = qram(&[
        "call",
        "--arch",
        "bucket",
        "--n",
        "2",
        "--memory",
        "random",
        "--mode",
        "swap",
        "--quantum-memory",
        "--address",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn superposition_address_spec_parses() {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let spec = format!("0:{a},3:{a}");
    let out = qram(&[
        "call",
        "--arch",
        "fanout",
        "--n",
        "2",
        "--memory",
        "random",
        "--seed",
        "9",
        "--address",
        &spec,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["final_state"].as_array().unwrap().len(), 2);

    let out = qram(&[
        "call",
        "--arch",
        "fanout",
        "--n",
        "2",
        "--memory",
        "zeros",
        "--address",
        "0:0.6,1:0.7",
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "non-normalized spec must be rejected"
    );
}
