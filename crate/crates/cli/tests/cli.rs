use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mstein(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mstein")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_all_passes() {
    let out = mstein(&["verify", "all", "--d", "6", "--seeds", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["pass"], true);
    assert!(r["rows"].as_array().unwrap().len() > 100);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["mode"], "float");
}

#[test]
fn runs_report_lists_variance_addends() {
    let out = mstein(&["bound", "--mode", "runs", "--alpha", "ones:n=100", "--h", "cos:a=1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let terms = r["result"]["variance_terms"].as_array().unwrap();
    assert_eq!(terms[0]["value"].as_f64().unwrap(), 300.0 / 16.0);
    assert_eq!(terms[1]["value"].as_f64().unwrap(), 99.0 / 8.0);
    assert_eq!(r["result"]["var_g"].as_f64().unwrap(), 300.0 / 16.0 + 99.0 / 8.0);
}

#[test]
fn malformed_kernel_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"order": 2, "entries": [[[1, 1], 1.0]]}"#).unwrap();
    let out = mstein(&["bound", "--mode", "fixed-chaos", "--kernel", path(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("repeats a coordinate"));

    fs::write(&bad, "{ not json").unwrap();
    let out = mstein(&["bound", "--mode", "fixed-chaos", "--kernel", path(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("JSON parse error"));

    let missing = dir.path().join("missing.json");
    assert_eq!(mstein(&["distance", "--dec", path(&missing)]).status.code(), Some(3));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(mstein(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(mstein(&["bound", "--mode", "sideways"]).status.code(), Some(2));
}

#[test]
fn decompose_then_bound_and_distance() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.json");
    let dec = dir.path().join("dec.json");
    // F = (X1 + X1 X2)/sqrt 2, centered with unit variance
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let values: Vec<f64> = (0..4)
        .map(|i| {
            let x1 = if i & 1 == 1 { 1.0 } else { -1.0 };
            let x2 = if i & 2 == 2 { 1.0 } else { -1.0 };
            s * (x1 + x1 * x2)
        })
        .collect();
    fs::write(&table, serde_json::json!({"d": 2, "values": values}).to_string()).unwrap();

    let out = mstein(&["decompose", "--table", path(&table), "--method", "hoeffding", "--out", path(&dec)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    let file: Value = serde_json::from_str(&fs::read_to_string(&dec).unwrap()).unwrap();
    assert_eq!(file["kernels"].as_array().unwrap().len(), 2);

    let bound = report(&mstein(&["bound", "--dec", path(&dec), "--h", "cos:a=1"]));
    let dist = report(&mstein(&["distance", "--dec", path(&dec), "--h", "cos:a=1"]));
    let total = bound["result"]["total"].as_f64().unwrap();
    let d = dist["result"]["value"].as_f64().unwrap();
    assert!(d <= total, "{d} > {total}");
    assert_eq!(dist["result"]["std_error"].as_f64().unwrap(), 0.0);

    let mc = report(&mstein(&["distance", "--dec", path(&dec), "--mode", "mc", "--samples", "20000", "--seed", "3"]));
    assert_eq!(mc["result"]["samples"].as_u64().unwrap(), 20000);
    assert_eq!(mc["result"]["seed"].as_u64().unwrap(), 3);
}

#[test]
fn rational_decomposition_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.json");
    fs::write(&table, r#"{"d": 3, "values": [0.5, -1, 0.25, 3, 0, 0, 1, -0.125]}"#).unwrap();
    let out = mstein(&["decompose", "--table", path(&table), "--arith", "rational"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["mode"], "rational");
    assert_eq!(r["rows"][0]["pass"], true);
}

#[test]
fn contract_and_operators_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    let c = dir.path().join("c.json");
    fs::write(&f, r#"{"order": 2, "entries": [[[1, 2], 0.5], [[2, 3], 0.25]]}"#).unwrap();
    let out = mstein(&["contract", "--f", path(&f), "--g", path(&f), "--r", "1", "--l", "1", "--out", path(&c)]);
    assert_eq!(out.status.code(), Some(0));
    let k: Value = serde_json::from_str(&fs::read_to_string(&c).unwrap()).unwrap();
    assert_eq!(k["order"], 2);

    let dec = dir.path().join("dec.json");
    let lf = dir.path().join("lf.json");
    fs::write(&dec, r#"{"dimension": 3, "mean": 0, "kernels": [{"order": 2, "entries": [[[1, 2], 0.5]]}]}"#).unwrap();
    let out = mstein(&["operators", "--dec", path(&dec), "--op", "L", "--out", path(&lf)]);
    assert_eq!(out.status.code(), Some(0));
    let l: Value = serde_json::from_str(&fs::read_to_string(&lf).unwrap()).unwrap();
    assert_eq!(l["kernels"][0]["entries"][0][1].as_f64().unwrap(), -1.0);
}

#[test]
fn sparse_build_and_bound() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("F.json");
    let out = mstein(&["sparse", "build", "--d", "3", "--m", "2", "--cover", "1,2;2,3;1,3", "--N", "16", "--out", path(&set)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["cardinality"].as_u64().unwrap(), 6 * r["result"]["representatives"].as_u64().unwrap());
    let out = mstein(&["bound", "--mode", "sparse", "--set", path(&set), "--beta", "ones:n=16"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert!(r["result"]["stats"]["exact_bound"].as_f64().unwrap() > 0.0);
    assert_eq!(
        r["result"]["weighted"]["measure"].as_f64().unwrap(),
        r["result"]["stats"]["cardinality"].as_f64().unwrap()
    );
}

#[test]
fn csv_bodies_are_reproducible() {
    let args = ["sparse", "scale", "--Ns", "16,32,64", "--format", "csv"];
    let a = mstein(&args);
    let b = mstein(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("N,cardinality,max_star,sharp,stat1,stat2,exact_bound\n"));

    let args = ["verify-estimates", "--seeds", "10", "--format", "csv"];
    assert_eq!(mstein(&args).stdout, mstein(&args).stdout);
    let args = ["bound", "--mode", "runs", "--rate", "4,8,16", "--format", "csv"];
    let out = mstein(&args);
    assert_eq!(out.stdout, mstein(&args).stdout);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 4);
}

#[test]
fn report_file_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("report.json");
    let out = mstein(&["verify-malliavin", "--d", "4", "--seeds", "5", "--report", path(&rep)]);
    assert_eq!(out.status.code(), Some(0));
    let on_disk: Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    let printed = report(&out);
    assert_eq!(on_disk["rows"], printed["rows"]);
    let rows: Vec<malliavin_stein::verify::CheckRow> = serde_json::from_value(on_disk["rows"].clone()).unwrap();
    assert!(rows.iter().all(|r| r.pass));
}

#[test]
fn rational_estimates() {
    let out = mstein(&["verify-estimates", "--seeds", "10", "--arith", "rational"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["mode"], "rational");
}
