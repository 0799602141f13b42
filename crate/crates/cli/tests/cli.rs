use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn regop(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regop"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn fixtures(dir: &Path) {
    write(dir, "a.json", r#"{"rows":2,"cols":2,"entries":[["1","-2"],["-3","4"]]}"#);
    write(dir, "b.json", r#"{"rows":2,"cols":2,"entries":[[0,1],[1,0]]}"#);
    write(dir, "pos.json", r#"{"rows":2,"cols":2,"entries":[["1/2",1],[0,"3/4"]]}"#);
    write(dir, "neg.json", r#"{"rows":2,"cols":2,"entries":[[-1,0],[0,1]]}"#);
    write(dir, "w.json", r#"{"dim":2,"entries":["2","1/3"]}"#);
}

#[test]
fn cor22_corpus_passes_with_exact_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = regop(
        dir.path(),
        &["verify", "cor22", "--corpus", "seed=7,dims=2x2x2x2,count=100", "--json", "r.json"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "r.json");
    assert_eq!(r["status"], "pass");
    assert_eq!(r["exact_zero"], true);
    assert_eq!(r["cases"], 100);
    assert_eq!(r["claim_id"], "cor22");
}

#[test]
fn prop21_from_files_passes() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let out = regop(
        dir.path(),
        &[
            "verify", "prop21", "--A0", "pos.json", "--B", "a.json", "--T", "pos.json", "--w",
            "w.json", "--json", "p.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(dir.path(), "p.json")["status"], "pass");
}

#[test]
fn violated_hypothesis_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let out = regop(
        dir.path(),
        &["verify", "synnatzschke_a", "--A", "a.json", "--B0", "neg.json", "--json", "s.json"],
    );
    assert_eq!(code(&out), 1);
    assert_eq!(report(dir.path(), "s.json")["status"], "fail");
}

#[test]
fn malformed_input_exits_two_without_report() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    write(dir.path(), "bad.json", r#"{"rows":2,"cols":2,"entries":[[1,2],[3]]}"#);
    let out = regop(
        dir.path(),
        &["verify", "cor22", "--A", "bad.json", "--B", "b.json", "--json", "r.json"],
    );
    assert_eq!(code(&out), 2);
    assert!(!dir.path().join("r.json").exists());
    write(dir.path(), "junk.json", "{not json");
    assert_eq!(code(&regop(dir.path(), &["verify", "cor22", "--A", "junk.json", "--B", "b.json"])), 2);
    assert_eq!(code(&regop(dir.path(), &["verify", "cor22", "--A", "a.json"])), 2);
    assert_eq!(code(&regop(dir.path(), &["verify", "cor99"])), 2);
    assert_eq!(code(&regop(dir.path(), &["frobnicate"])), 2);
}

#[test]
fn cor23_exact_and_float_paths() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let out = regop(dir.path(), &["verify", "cor23", "--A", "a.json", "--B", "b.json", "--json", "e.json"]);
    assert_eq!(code(&out), 0);
    let r = report(dir.path(), "e.json");
    assert_eq!(r["exact"], true);
    assert_eq!(r["metrics"]["product"].as_f64(), Some(6.0));
    let out = regop(
        dir.path(),
        &[
            "verify", "cor23", "--A", "a.json", "--B", "b.json", "--exact=false", "--p-in", "inf",
            "--p-mid1", "inf", "--p-mid2", "inf", "--p-out", "inf", "--samples", "200", "--json",
            "f.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(dir.path(), "f.json")["exact"], false);
}

#[test]
fn gap_with_hadamard_is_informational() {
    let dir = tempfile::tempdir().unwrap();
    let out = regop(dir.path(), &["gap", "--hadamard", "1", "--samples", "100", "--json", "g.json"]);
    assert_eq!(code(&out), 0);
    let r = report(dir.path(), "g.json");
    assert_eq!(r["status"], "info");
    assert!(r["metrics"]["rho"].as_f64().unwrap() <= 0.5 + 1e-6);
    assert!((r["metrics"]["regular_side"].as_f64().unwrap() - 4.0).abs() < 1e-6);
}

#[test]
fn counterexample_report_has_contrast_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["counterexample", "--n", "3", "--k", "2", "--seed", "5", "--operators", "5"];
    let first = [&args[..], &["--json", "c1.json"]].concat();
    let second = [&args[..], &["--json", "c2.json"]].concat();
    assert_eq!(code(&regop(dir.path(), &first)), 0);
    assert_eq!(code(&regop(dir.path(), &second)), 0);
    let a = fs::read(dir.path().join("c1.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("c2.json")).unwrap());
    let r = report(dir.path(), "c1.json");
    assert_eq!(r["status"], "pass");
    let rows = r["contrast"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        for key in ["quantity", "finite_value", "paper_linf_value", "citation"] {
            assert!(row[key].is_string(), "{key}");
        }
    }
    assert_eq!(code(&regop(dir.path(), &["counterexample", "--n", "3", "--k", "4"])), 2);
}

#[test]
fn corpus_regeneration_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["c1", "c2"] {
        let o = regop(dir.path(), &["corpus", "seed=7,dims=2x2x2x2,count=3,sign=positive", "--out", out]);
        assert_eq!(code(&o), 0);
    }
    let names = ["case_0000.json", "case_0001.json", "case_0002.json", "manifest.json"];
    for name in names {
        assert_eq!(
            fs::read(dir.path().join("c1").join(name)).unwrap(),
            fs::read(dir.path().join("c2").join(name)).unwrap()
        );
    }
    let case = report(&dir.path().join("c1"), "case_0001.json");
    for key in ["A", "B", "C", "D"] {
        for row in case[key]["entries"].as_array().unwrap() {
            for x in row.as_array().unwrap() {
                assert!(!x.as_str().unwrap().starts_with('-'));
            }
        }
    }
}

#[test]
fn norm_subcommand_prints_result() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let out = regop(dir.path(), &["norm", "--A", "a.json", "--p-in", "1", "--p-out", "1"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["value"].as_f64(), Some(6.0));
    assert_eq!(v["result"]["certified"], true);
}

#[test]
fn timing_flag_adds_runtime() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let out = regop(dir.path(), &["verify", "cor22", "--A", "a.json", "--B", "b.json", "--timing"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["runtime_ms"].is_u64());
    let out = regop(dir.path(), &["verify", "cor22", "--A", "a.json", "--B", "b.json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.get("runtime_ms").is_none());
}
