use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn xrmat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xrmat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("each line is JSON"))
        .collect()
}

#[test]
fn verify_all_passes() {
    let out = xrmat(&["verify", "all", "--samples", "2", "--seed", "7"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let reports = lines(&out);
    let summary = reports.last().unwrap();
    assert_eq!(summary["summary"]["failed"], 0);
    assert!(reports.len() > 50);
}

#[test]
fn exact_box_ybe_reports_exact_zero() {
    let out = xrmat(&["verify", "box-ybe", "--backend", "exact"]);
    assert_eq!(out.status.code(), Some(0));
    let reports = lines(&out);
    let ybe = reports.iter().find(|r| r["check"] == "twisted-ybe").unwrap();
    assert_eq!(ybe["residual"], "exact-zero");
    assert_eq!(ybe["params"], "symbolic");
}

#[test]
fn fused_minus_three_samples() {
    let out = xrmat(&[
        "verify",
        "fused-ybe",
        "--n",
        "2",
        "--sign",
        "minus",
        "--samples",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let reports = lines(&out);
    let checks: Vec<&Value> = reports.iter().filter(|r| r.get("check").is_some()).collect();
    assert_eq!(checks.len(), 3);
    assert!(checks.iter().all(|r| r["pass"] == true));
    let seeds: Vec<u64> = checks.iter().map(|r| r["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, [0, 1, 2]);
}

#[test]
fn negative_controls_are_detected() {
    let out = xrmat(&["verify", "box-ybe", "--negative-controls", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let reports = lines(&out);
    assert!(reports
        .iter()
        .any(|r| r["check"] == "negative-control:twisted-ybe" && r["pass"] == true));
}

#[test]
fn failing_check_exits_one() {
    // A tolerance of zero cannot be met by a rounded numeric residual.
    let out = xrmat(&["check-ybe", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(lines(&out)[0]["pass"], false);
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(
        xrmat(&["verify", "hecke", "--backend", "exact"]).status.code(),
        Some(2)
    );
    assert_eq!(xrmat(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(xrmat(&["check-relations", "--q", "1,abc"]).status.code(), Some(2));
    assert_eq!(
        xrmat(&["check-ybe", "--level", "fused", "--backend", "exact"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn io_errors_exit_three() {
    let out = xrmat(&["dump-cartan", "--output", "/nonexistent-dir/cartan.json"]);
    assert_eq!(out.status.code(), Some(3));
    let out = xrmat(&["verify", "relations", "--output", "/nonexistent-dir/r.jsonl"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn dump_cartan_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cartan.json");
    let out = xrmat(&["dump-cartan", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["cartan_matrix"].as_array().unwrap().len(), 4);
    assert_eq!(v["parity"], serde_json::json!([1, 0, 1, 0]));
}

#[test]
fn build_r_is_byte_stable() {
    let args = [
        "build-r", "--q", "1.1,0.2", "--u", "0.7,-0.3", "--v", "1.3,0.4", "--x", "0.5,0.5",
    ];
    let a = xrmat(&args);
    let b = xrmat(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["matrix"]["legs"], serde_json::json!([4, 4]));
}

#[test]
fn build_r_forms_agree() {
    let base = [
        "--q", "0.9,0.3", "--u", "1.2,0", "--v", "0.4,0.8", "--x", "0.3,-0.6",
    ];
    let spectral = xrmat(&[&["build-r", "--form", "spectral"][..], &base].concat());
    let explicit = xrmat(&[&["build-r", "--form", "explicit"][..], &base].concat());
    let entries = |o: &Output| -> BTreeMap<(u64, u64), (f64, f64)> {
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v["matrix"]["entries"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| {
                let z = &e[2];
                let key = (e[0].as_u64().unwrap(), e[1].as_u64().unwrap());
                (key, (z["re"].as_f64().unwrap(), z["im"].as_f64().unwrap()))
            })
            .collect()
    };
    let (a, b) = (entries(&spectral), entries(&explicit));
    let keys: BTreeSet<_> = a.keys().chain(b.keys()).collect();
    let diff = keys
        .into_iter()
        .map(|k| {
            let (s, t) = (
                a.get(k).copied().unwrap_or_default(),
                b.get(k).copied().unwrap_or_default(),
            );
            (s.0 - t.0).hypot(s.1 - t.1)
        })
        .fold(0.0, f64::max);
    assert!(diff < 1e-12, "{diff}");
}

#[test]
fn fusion_report_dimensions() {
    let out = xrmat(&["fusion-report", "--n", "2", "--sign", "minus", "--seed", "5"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["dim"], 8);
    assert_eq!(v["basis"]["shape"], serde_json::json!([16, 8]));
    assert_eq!(v["commutant_dimension"], 1);
}

#[test]
fn lemma1_and_relations() {
    assert_eq!(
        xrmat(&["check-relations", "--backend", "exact"]).status.code(),
        Some(0)
    );
    assert_eq!(xrmat(&["check-lemma1", "--seed", "2"]).status.code(), Some(0));
    // Away from y = qx the second subspace is not invariant.
    let out = xrmat(&["check-lemma1", "--x", "0.5,0.1", "--y", "0.9,-0.4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dynamical_with_negative_control() {
    let out = xrmat(&[
        "check-dynamical",
        "--n",
        "2",
        "--sign",
        "plus",
        "--negative-controls",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(lines(&out).len(), 2);
}

#[test]
fn single_thread_output_is_bitwise_reproducible() {
    let args = [
        "verify",
        "lemma2",
        "--samples",
        "2",
        "--seed",
        "9",
        "--single-thread",
    ];
    let strip = |o: Output| -> Vec<Value> {
        lines(&o)
            .into_iter()
            .map(|mut v| {
                if let Some(m) = v.as_object_mut() {
                    m.remove("elapsed_ms");
                }
                v
            })
            .collect()
    };
    assert_eq!(strip(xrmat(&args)), strip(xrmat(&args)));
}
