//! Exit-code, artifact and determinism contract of the `ltvobs` binary.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use common::scenario_path;
use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn ltvobs(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ltvobs"))
        .args(args)
        .output()
        .expect("binary runs");
    let text = String::from_utf8_lossy(&out.stdout).into_owned()
        + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().expect("exited normally"), text)
}

fn scenario(name: &str) -> String {
    scenario_path(name).display().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn out_dir(tmp: &TempDir, name: &str) -> PathBuf {
    tmp.path().join(name)
}

fn run_in(tmp: &TempDir, name: &str, args: &[&str]) -> (i32, String, PathBuf) {
    let dir = out_dir(tmp, name);
    let mut full: Vec<&str> = args.to_vec();
    let dir_str = dir.display().to_string();
    full.extend(["--out", &dir_str]);
    let (code, text) = ltvobs(&full);
    (code, text, dir)
}

#[test]
fn counterexample_default_reproduces() {
    let tmp = TempDir::new().unwrap();
    let (code, text, dir) = run_in(&tmp, "a", &["counterexample"]);
    assert_eq!(code, 0, "{text}");
    let report = read_json(&dir.join("counterexample_report.json"));
    assert_eq!(report["entries"].as_array().unwrap().len(), 3);
    assert!(report["reproduced"].as_bool().unwrap());
    let csv = fs::read_to_string(dir.join("counterexample_witness.csv")).unwrap();
    assert!(csv.starts_with("s,y1,y2\n"));
    for line in csv.lines().skip(1) {
        for cell in line.split(',').skip(1) {
            assert!(cell.parse::<f64>().unwrap().abs() < 1e-9);
        }
    }
}

#[test]
fn outputs_are_reproducible_apart_from_wall_clock() {
    let tmp = TempDir::new().unwrap();
    let (_, _, a) = run_in(&tmp, "a", &["counterexample"]);
    let (_, _, b) = run_in(&tmp, "b", &["counterexample"]);
    for f in ["counterexample_report.json", "counterexample_witness.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let strip = |dir: &Path| {
        let mut m = read_json(&dir.join("manifest.json"));
        m.as_object_mut().unwrap().remove("wall_clock_seconds");
        m.as_object_mut().unwrap().remove("out_dir");
        m
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn usage_errors_exit_64() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(run_in(&tmp, "a", &["counterexample", "--delta", "-1"]).0, 64);
    assert_eq!(run_in(&tmp, "b", &["pe-check"]).0, 64);
    assert_eq!(run_in(&tmp, "c", &["counterexample", "--jobs", "0"]).0, 64);
    assert_eq!(
        run_in(&tmp, "d", &["gramian", "--config", "builtin:counterexample", "--nodes", "200"]).0,
        64
    );
    assert_eq!(ltvobs(&["explode"]).0, 64);
    assert_eq!(ltvobs(&["--help"]).0, 0);
}

#[test]
fn unwritable_output_exits_2() {
    let tmp = TempDir::new().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub").display().to_string();
    let (code, text) = ltvobs(&["counterexample", "--out", &out]);
    assert_eq!(code, 2, "{text}");
}

#[test]
fn pe_check_verdicts() {
    let tmp = TempDir::new().unwrap();
    let (code, _, dir) = run_in(&tmp, "pass", &["pe-check", "--config", &scenario("three_beacons")]);
    assert_eq!(code, 0);
    assert!(read_json(&dir.join("pe_report.json"))["pass"].as_bool().unwrap());
    let (code, _, _) = run_in(
        &tmp,
        "fail",
        &["pe-check", "--config", &scenario("single_beacon_constant_u")],
    );
    assert_eq!(code, 1);
}

#[test]
fn input_errors_map_to_65_and_66() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("missing.json").display().to_string();
    assert_eq!(run_in(&tmp, "a", &["pe-check", "--config", &missing]).0, 66);

    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{\n  \"dim\": 2,\n  \"beacons\": [[0, 0]\n}").unwrap();
    let (code, text, _) = run_in(&tmp, "b", &["pe-check", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, 65);
    assert!(text.contains("line 4"), "{text}");

    let mut sc: Value = serde_json::from_str(&fs::read_to_string(scenario_path("three_beacons")).unwrap()).unwrap();
    sc["x0"] = serde_json::json!([1.0, 2.0, 3.0]);
    let wrong = tmp.path().join("wrong.json");
    fs::write(&wrong, sc.to_string()).unwrap();
    assert_eq!(run_in(&tmp, "c", &["pe-check", "--config", wrong.to_str().unwrap()]).0, 65);
}

#[test]
fn gramian_targets() {
    let tmp = TempDir::new().unwrap();
    let (code, _, dir) = run_in(
        &tmp,
        "builtin",
        &["gramian", "--config", "builtin:counterexample", "--t", "0", "--delta", "6.283185"],
    );
    assert_eq!(code, 0);
    let r = read_json(&dir.join("gramian_report.json"));
    assert!(r["report"]["eigenvalues"][0].as_f64().unwrap() <= 1e-8);
    assert_eq!(r["report"]["eigenvalues"].as_array().unwrap().len(), 2);

    let (code, _, dir) = run_in(
        &tmp,
        "lifted",
        &["gramian", "--config", &scenario("three_beacons"), "--use-m"],
    );
    assert_eq!(code, 0);
    let r = read_json(&dir.join("gramian_report.json"));
    assert_eq!(r["output_map"], "M");
    assert!(r["report"]["eigenvalues"][0].as_f64().unwrap() >= 1e-4);
}

#[test]
fn simulate_reference_and_degenerate() {
    let tmp = TempDir::new().unwrap();
    let reference = scenario_path("reference_observer").display().to_string();
    let args = [
        "simulate",
        "--config",
        &scenario("three_beacons"),
        "--observer",
        &reference,
        "--seed",
        "0",
    ];
    let (code, text, a) = run_in(&tmp, "a", &args);
    assert_eq!(code, 0, "{text}");
    let (_, _, b) = run_in(&tmp, "b", &args);
    assert_eq!(fs::read(a.join("trace.csv")).unwrap(), fs::read(b.join("trace.csv")).unwrap());
    let summary = read_json(&a.join("summary.json"));
    assert!(summary["metrics"]["final_pos_err"].as_f64().unwrap() <= 1e-3);
    assert_eq!(summary["unobservable_suspected"], false);

    let manifest = read_json(&a.join("manifest.json"));
    let bytes = fs::read(scenario_path("three_beacons")).unwrap();
    assert_eq!(manifest["input_sha256"], hex::encode(Sha256::digest(&bytes)));
    assert_eq!(manifest["subcommand"], "simulate");

    let degenerate = scenario_path("degenerate_observer").display().to_string();
    let (code, _, dir) = run_in(
        &tmp,
        "degenerate",
        &["simulate", "--config", &scenario("single_beacon_constant_u"), "--observer", &degenerate],
    );
    assert_eq!(code, 0);
    assert_eq!(read_json(&dir.join("summary.json"))["unobservable_suspected"], true);
}

#[test]
fn writes_stay_inside_out_dir() {
    let tmp = TempDir::new().unwrap();
    let (code, _, dir) = run_in(&tmp, "only", &["pe-check", "--config", &scenario("three_beacons")]);
    assert_eq!(code, 0);
    let top: Vec<_> = fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(top, vec![dir.clone()]);
    let mut inside: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    inside.sort();
    assert_eq!(inside, ["manifest.json", "pe_report.json"]);
}
