use std::fs;
use std::process::{Command, Output};

use opakit::fixtures::REFERENCE_TABLES;
use opakit::text::parse_poly;
use serde_json::Value;

fn opakit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opakit")).args(args).env_remove("OPAKIT_OUT_DIR").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn hardy_table_entry() {
    let v = json(&opakit(&["opa", "--space", "dirichlet:0,0", "--f", "2-z1-z2", "--n", "2"]));
    assert_eq!(v["schema"], "opakit/1");
    assert_eq!(v["config"]["n"], 2);
    assert_eq!(v["config"]["space"], "dirichlet:0,0");
    assert_eq!(v["result"]["residual_ok"], true);
    let p = parse_poly(v["result"]["approximant"].as_str().unwrap(), 2).unwrap();
    assert_eq!(p, parse_poly("(7+2*z1+2*z2)/17", 2).unwrap());
}

#[test]
fn constant_target() {
    let v = json(&opakit(&["opa", "--f", "1", "--n", "3"]));
    assert_eq!(v["result"]["approximant"], "1");
    assert_eq!(v["result"]["nu_float"], 0.0);
}

#[test]
fn sequence_and_float_mode() {
    let v = json(&opakit(&["opa", "--f", "2-z1-z2", "--n", "3", "--sequence"]));
    assert_eq!(v["result"].as_array().unwrap().len(), 4);
    let v = json(&opakit(&["opa", "--space", "dirichlet:1/2,1/2", "--f", "2-z1-z2", "--n", "2", "--mode", "float"]));
    assert!(v["result"]["nu_float"].as_f64().unwrap() > 0.0);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["opa", "--space", "da:2", "--f", "1-(1/2*s2)*z1-(1/2*s2)*z2", "--n", "4"];
    let a = opakit(&args);
    let b = opakit(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let args = ["filter", "impulse", "--b", "1-z1/2-z2/4", "--rows", "12", "--cols", "12"];
    assert_eq!(opakit(&args).stdout, opakit(&args).stdout);
}

#[test]
fn emitted_polynomials_reparse() {
    let v = json(&opakit(&["ortho", "--space", "bergman2", "--f", "2-z1-z2", "--n", "5"]));
    assert_eq!(v["result"]["convention"], "monic");
    for m in v["result"]["members"].as_array().unwrap() {
        let text = m["poly"].as_str().unwrap();
        let p = parse_poly(text, 2).unwrap();
        assert_eq!(p.to_string(), text);
    }
    let v = json(&opakit(&["ortho", "--f", "2-z1-z2", "--n", "3", "--convention", "opa-difference"]));
    assert_eq!(v["result"]["convention"], "opa_difference");
}

#[test]
fn parse_error_exits_2_with_position() {
    let out = opakit(&["opa", "--f", "1+*z1", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte 2"));
}

#[test]
fn exact_mode_with_fractional_alpha_exits_3() {
    let out = opakit(&["opa", "--space", "dirichlet:1/2", "--f", "1-z", "--n", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn profile_csv_for_counterexample() {
    let out = opakit(&["profile", "--f", "1-z1*z2", "--face", "z2", "--grid", "16"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("face,t,min_modulus"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 16);
    for row in rows {
        let m: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!((m - 1.0).abs() < 1e-9);
    }
}

#[test]
fn zero_free_and_filter_verdicts() {
    let v = json(&opakit(&["zero-free", "--f", "1-z1/2", "--grid", "64"]));
    assert_eq!(v["result"]["verdict"]["kind"], "zero_free_closed");
    let v = json(&opakit(&["filter", "stability", "--B", "1-z1/2-z2/4", "--grid", "64"]));
    assert_eq!(v["result"]["verdict"], "stable");
    let v =
        json(&opakit(&["filter", "stabilize", "--B", "1-(1/3)*z1-(1/3)*z2+(23/39)*z1*z2", "--n", "1", "--grid", "64"]));
    assert!(v["result"]["p_n_star"].is_string());
}

#[test]
fn closed_forms_and_shapiro() {
    let v = json(&opakit(&["closed-form", "distance", "--weights", "hardy", "--n", "3"]));
    assert_eq!(v["result"]["nu2_exact"], "1/5");
    let v = json(&opakit(&["closed-form", "cyclicity", "--family", "bidisk:1,1"]));
    assert_eq!(v["result"]["cyclic"], false);
    let v = json(&opakit(&["closed-form", "cyclicity", "--family", "bidisk:-1,-1"]));
    assert_eq!(v["result"]["cyclic"], true);
    let v = json(&opakit(&["shapiro", "--space", "hardy2", "--points", "(1/2,1/3)", "--trunc", "20", "--jmax", "4"]));
    assert_eq!(v["result"]["ok"], true);
}

#[test]
fn filter_run_reads_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    fs::write(&data, "1,0\n0,0\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_opakit"))
        .args(["filter", "run", "--b", "1-z1*z2/4", "--rows", "3", "--cols", "3", "--out", "r.csv"])
        .arg("--data")
        .arg(&data)
        .env("OPAKIT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][0], "1");
    assert_eq!(rows[1][1], "1/4");
    assert_eq!(rows[2][2], "1/16");
    assert_eq!(rows[0][1], "0");
}

#[test]
fn out_dir_receives_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_opakit"))
        .args(["opa", "--f", "2-z1-z2", "--n", "1"])
        .env("OPAKIT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("opa.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["command"], "opa");
}

#[test]
fn fixtures_filter_runs_subset() {
    let out = opakit(&["fixtures", "--filter", "shanks"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let verdicts: Vec<_> = text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert_eq!(verdicts.len(), 1);
    assert!(verdicts[0].contains("shanks"));
    assert!(text.lines().last().unwrap().ends_with("ledger notes"));
}

#[test]
fn unknown_filter_fails() {
    assert_eq!(opakit(&["fixtures", "--filter", "nope"]).status.code(), Some(1));
}

#[test]
fn corrupted_corpus_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tables.txt");
    fs::write(&path, REFERENCE_TABLES.replacen("p1 =", "p1 = 1+", 1)).unwrap();
    let out = opakit(&["fixtures", "--filter", "shanks", "--corpus", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let pristine = dir.path().join("ok.txt");
    fs::write(&pristine, REFERENCE_TABLES).unwrap();
    let out = opakit(&["fixtures", "--filter", "shanks", "--corpus", pristine.to_str().unwrap()]);
    assert!(out.status.success());
}
