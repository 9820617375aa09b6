use std::process::{Command, Output};

use serde_json::Value;

fn cmkz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmkz"))
        .args(args)
        .output()
        .expect("cmkz runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn spectrum_reports_complex_pairs() {
    let out = cmkz(&["spectrum", "--n", "3", "--lambda", "2,1", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["d_lambda"], 2);
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    for point in points {
        let p = point["p"].as_array().unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].as_array().unwrap().len(), 2);
        assert!(point["l0_residual"].as_f64().unwrap() < 1e-8);
    }
}

#[test]
fn spectrum_writes_json_file() {
    let path = std::env::temp_dir().join(format!("cmkz-spectrum-{}.json", std::process::id()));
    let out = cmkz(&[
        "spectrum",
        "--n",
        "2",
        "--lambda",
        "1,1",
        "--json",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(written, out.stdout);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["spectrum", "--n", "4", "--lambda", "2,1"][..],
        &["spectrum", "--n", "3", "--lambda", "x"],
        &["verify", "--suite", "nope"],
        &["verify", "--n-max", "1", "--n-min", "2"],
        &["verify", "--trials", "0"],
        &["verify", "--config", "/nonexistent/cmkz.json"],
        &["bogus"],
        &[],
    ] {
        let out = cmkz(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn passing_suite_exits_with_zero() {
    let out = cmkz(&[
        "verify", "--suite", "l0", "--n-max", "3", "--trials", "2", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["suite"], "l0");
    let record = &v["records"][0];
    for key in ["check", "anchor", "inputs_digest", "residuals", "seed", "config_digest"] {
        assert!(record.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn injected_fault_exits_with_one() {
    let path = std::env::temp_dir().join(format!("cmkz-config-{}.json", std::process::id()));
    std::fs::write(
        &path,
        r#"{"suite": "l0", "n_max": 3, "trials": 1, "inject_p_offset": 0.1}"#,
    )
    .unwrap();
    let out = cmkz(&["verify", "--config", path.to_str().unwrap()]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], false);
    assert!(v["failures"].as_u64().unwrap() > 0);
}

#[test]
fn verify_is_deterministic() {
    let args = [
        "verify",
        "--suite",
        "collision",
        "--n-max",
        "3",
        "--trials",
        "2",
        "--seed",
        "8",
    ];
    let (a, b) = (cmkz(&args), cmkz(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn fiber_counts_solutions() {
    let out = cmkz(&["fiber", "--lambda", "3,1", "--sigma-seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["expected"], 3);
    assert_eq!(v["solutions"].as_array().unwrap().len(), 3);
}
