use std::{collections::BTreeSet, fs};

use clap::Parser;
use serde_json::{json, Value};
use tempfile::TempDir;

use napspmv::{
    cost::ModelParams,
    sparse::{generate_random, split_blocks, Partition, SplitMode},
    Topology,
};

use crate::{args::Cli, run, EXIT_ERROR, EXIT_OK};

fn exec(argv: &[&str]) -> i32 {
    let mut full = vec!["napspmv"];
    full.extend_from_slice(argv);
    run(Cli::try_parse_from(full).expect("valid command line"))
}

/// Runs with `--out` in a scratch directory and returns (exit code, output).
fn exec_out(argv: &[&str]) -> (i32, String) {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let mut full = argv.to_vec();
    let path = out.to_str().unwrap().to_string();
    full.extend(["--out", &path]);
    let code = exec(&full);
    (code, fs::read_to_string(&out).unwrap_or_default())
}

fn json(argv: &[&str]) -> Value {
    let (code, text) = exec_out(argv);
    assert_eq!(code, EXIT_OK, "{argv:?}");
    serde_json::from_str(&text).unwrap()
}

#[test]
fn missing_matrix_file() {
    assert_eq!(exec(&["verify", "--mtx", "/nonexistent/missing.mtx"]), EXIT_ERROR);
}

#[test]
fn bad_flags_are_usage_errors() {
    for argv in [
        &["napspmv", "verify", "--fixture", "example1", "--partition", "metis"][..],
        &["napspmv", "verify", "--random", "100"],
        &["napspmv", "verify"],
        &["napspmv", "verify", "--fixture", "example1", "--random", "10x2"],
    ] {
        let err = Cli::try_parse_from(argv).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{argv:?}");
    }
    assert_eq!(exec(&["verify", "--fixture", "nope"]), EXIT_ERROR);
    assert_eq!(exec(&["verify", "--random", "10x20"]), EXIT_ERROR);
    assert_eq!(exec(&["verify", "--random", "6x2", "--nodes", "4", "--ppn", "2"]), EXIT_ERROR);
}

#[test]
fn fixture_report() {
    let r = json(&["verify", "--fixture", "example1"]);
    assert_eq!(r["topology"], json!({"nodes": 3, "ppn": 2, "num_procs": 6}));
    let std = &r["algorithms"]["standard"];
    let nap = &r["algorithms"]["node_aware"];
    assert_eq!(std["verified"], true);
    assert_eq!(nap["verified"], true);
    assert_eq!(std["messages"]["total"]["messages"], 11);
    assert_eq!(std["messages"]["inter"]["messages"], 8);
    assert_eq!(nap["messages"]["inter"]["messages"], 5);
    assert_eq!(nap["messages"]["inter"]["bytes"], 56);
    assert_eq!(r["comparison"]["inter_msgs_reduction"], 1.6);
    assert!(nap["modeled_cost"]["total"].as_f64().unwrap() < std["modeled_cost"]["total"].as_f64().unwrap());
}

#[test]
fn random_report_verifies() {
    let r = json(&["verify", "--random", "1000x25", "--seed", "1", "--nodes", "4", "--ppn", "4"]);
    assert_eq!(r["matrix"], json!({"source": "random:1000x25", "n": 1000, "nnz": 25000}));
    for alg in ["standard", "node_aware"] {
        assert_eq!(r["algorithms"][alg]["verified"], true);
        assert!(r["algorithms"][alg]["max_rel_err"].as_f64().unwrap() <= 1e-12);
    }
}

#[test]
fn model_errors_do_not_fail_verification() {
    let r = json(&["verify", "--fixture", "example1", "--nodes", "6", "--ppn", "1"]);
    let cost = &r["algorithms"]["standard"]["modeled_cost"];
    assert!(cost["error"].as_str().unwrap().contains("not positive"));
    assert!(cost.get("total").is_none());
    assert_eq!(r["comparison"]["modeled_speedup"], Value::Null);
    assert_eq!(r["algorithms"]["node_aware"]["verified"], true);
}

#[test]
fn reduction_at_least_one() {
    for (n, k, nodes, ppn, part) in [(500, 5, 4, 4, "strided"), (2000, 50, 2, 8, "contiguous"), (300, 25, 8, 2, "strided")] {
        let r = json(&[
            "verify", "--random", &format!("{n}x{k}"), "--nodes", &nodes.to_string(), "--ppn",
            &ppn.to_string(), "--partition", part,
        ]);
        let ratio = &r["comparison"]["inter_bytes_reduction"];
        assert!(ratio == "inf" || ratio.as_f64().unwrap() >= 1.0, "{ratio}");
    }
}

#[test]
fn partition_and_params_files() {
    let dir = TempDir::new().unwrap();
    let parts = dir.path().join("parts.txt");
    fs::write(&parts, "5\n4\n3\n2\n1\n0\n").unwrap();
    let spec = format!("file:{}", parts.display());
    let params = dir.path().join("params.json");
    fs::write(&params, ModelParams::default().to_json()).unwrap();
    let r = json(&[
        "verify", "--fixture", "example1", "--partition", &spec, "--model-params",
        params.to_str().unwrap(),
    ]);
    assert_eq!(r["partition"], "explicit");
    assert_eq!(r["algorithms"]["node_aware"]["verified"], true);

    fs::write(&parts, "5\n4\n9\n2\n1\n0\n").unwrap();
    assert_eq!(exec(&["verify", "--fixture", "example1", "--partition", &spec]), EXIT_ERROR);
    fs::write(&params, "{\"short\": 1}").unwrap();
    assert_eq!(
        exec(&["verify", "--fixture", "example1", "--model-params", params.to_str().unwrap()]),
        EXIT_ERROR
    );
}

#[test]
fn standard_dump_matches_fixture_tables() {
    let d = json(&["pattern-dump", "--fixture", "example1"]);
    let dests = |r: &str| -> Vec<u64> {
        d[r].as_array().unwrap().iter().map(|e| e["dest"].as_u64().unwrap()).collect()
    };
    let expect: [&[u64]; 6] = [&[3, 4, 5], &[0, 3], &[3, 4], &[0, 2], &[1], &[0]];
    for (r, want) in expect.iter().enumerate() {
        assert_eq!(dests(&r.to_string()), *want);
    }
    assert_eq!(d["3"], json!([{"dest": 0, "indices": [3]}, {"dest": 2, "indices": [3]}]));
}

#[test]
fn node_aware_dump_matches_fixture_tables() {
    let d = json(&["pattern-dump", "--fixture", "example1", "--node-aware"]);
    assert_eq!(d["node_sends"], json!({"0": [1, 2], "1": [0, 2], "2": [0]}));
    assert_eq!(
        d["node_indices"],
        json!({
            "0": [{"dest": 1, "indices": [0, 1]}, {"dest": 2, "indices": [0]}],
            "1": [{"dest": 0, "indices": [3]}, {"dest": 2, "indices": [2]}],
            "2": [{"dest": 0, "indices": [4, 5]}]
        })
    );
    assert_eq!(d["send_map"], json!({"0": [1], "1": [2], "2": [0], "3": [2], "4": [0], "5": []}));
}

#[test]
fn diagonal_dump_is_empty() {
    let dir = TempDir::new().unwrap();
    let mtx = dir.path().join("diag.mtx");
    let mut text = String::from("%%MatrixMarket matrix coordinate real general\n8 8 8\n");
    for i in 1..=8 {
        text.push_str(&format!("{i} {i} {i}.5\n"));
    }
    fs::write(&mtx, text).unwrap();
    let m = mtx.to_str().unwrap();
    let d = json(&["pattern-dump", "--mtx", m, "--nodes", "2", "--ppn", "2", "--node-aware"]);
    for (_, section) in d.as_object().unwrap() {
        for (_, v) in section.as_object().unwrap() {
            assert_eq!(v, &json!([]));
        }
    }
    let s = json(&["pattern-dump", "--mtx", m]);
    assert!(s.as_object().unwrap().values().all(|v| v == &json!([])));
    assert_eq!(exec(&["verify", "--mtx", m]), EXIT_OK);
}

#[test]
fn weak_sweep_grid() {
    let (code, csv) = exec_out(&["sweep", "weak", "--base", "40", "--topos", "2x2,1x2", "--nnz", "5,25", "--seeds", "1,2,3"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], crate::sweep::HEADER);
    assert_eq!(lines.len(), 1 + 2 * 2 * 3 * 2);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 12 && l.ends_with(",true")));
    let (_, empty) = exec_out(&["sweep", "weak", "--topos", ""]);
    assert_eq!(empty, format!("{}\n", crate::sweep::HEADER));
}

/// Total distinct off-process columns over all ranks.
fn off_process_columns(n: usize, seed: u64, nodes: usize, ppn: usize) -> usize {
    let a = generate_random(n, 25, seed).unwrap();
    let topo = Topology::new(nodes, ppn).unwrap();
    let part = Partition::contiguous(n, &topo).unwrap();
    (0..topo.num_procs())
        .map(|r| {
            let b = split_blocks(&a, &part, &topo, r, SplitMode::Standard);
            b.off_process().unwrap().col_map.iter().collect::<BTreeSet<_>>().len()
        })
        .sum()
}

#[test]
fn strong_sweep_volume_grows_with_processes() {
    let (code, csv) = exec_out(&["sweep", "strong", "--base", "2048", "--topos", "1x4,2x4,4x4", "--nnz", "25", "--seeds", "9"]);
    assert_eq!(code, EXIT_OK);
    let procs: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(procs, ["4", "4", "8", "8", "16", "16"]);
    let counts: Vec<usize> = [(1, 4), (2, 4), (4, 4)]
        .iter()
        .map(|&(n, p)| off_process_columns(2048, 9, n, p))
        .collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
}
