use assert_cmd::Command;
use serde_json::Value;

fn schmidt() -> Command {
    let mut c = Command::cargo_bin("schmidt").unwrap();
    c.env_remove("SCHMIDT_BENCH_THREADS");
    c
}

fn json_of(args: &[&str]) -> Value {
    let out = schmidt().args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn fidelity(v: &Value) -> f64 {
    v["result"]["fidelity"].as_f64().unwrap()
}

#[test]
fn fidelity_lu_examples() {
    let v = json_of(&["fidelity-lu", "--target", "0.85,0.08,0.07", "--seed", "0.45,0.45,0.1"]);
    let f = fidelity(&v);
    assert!(f > 0.795 && f < 0.796, "{f}");
    assert_eq!(v["command"], "fidelity-lu");
    assert_eq!(v["input"]["target"], serde_json::json!([0.85, 0.08, 0.07]));
    let v = json_of(&["fidelity-lu", "--target", "0.5,0.5", "--seed", "0.5,0.5"]);
    assert!((fidelity(&v) - 1.0).abs() < 1e-15);
}

#[test]
fn metadata_echoes_defaults() {
    let v = json_of(&["fidelity-lu", "--target", "1", "--seed", "1"]);
    assert_eq!(v["step"], 0.005);
    assert_eq!(v["tol"], 1e-9);
    assert_eq!(v["restarts"], 16);
    assert!(v["wall_time_ms"].is_number());
    assert!(v["method"].is_string());
}

#[test]
fn losr_and_nested_forms() {
    let v = json_of(&["fidelity-losr", "--target", "0.85,0.08,0.07", "--seed", "0.45,0.45,0.1"]);
    assert!(fidelity(&v) > 0.8212);
    assert_eq!(v["result"]["ancilla"].as_array().unwrap().len(), 9);

    let flat = json_of(&["--no-timing", "iid-dilute", "--target", "0.54,0.02,0.44", "--d", "3", "--n", "1"]);
    let nested = json_of(&["--no-timing", "iid", "dilute", "--target", "0.54,0.02,0.44", "--d", "3", "--n", "1"]);
    assert_eq!(flat, nested);

    let v = json_of(&["embezzle", "harmonic", "--n", "4"]);
    let w: Vec<f64> = serde_json::from_value(v["result"]["weights"].clone()).unwrap();
    for (a, b) in w.iter().zip([0.48, 0.24, 0.16, 0.12]) {
        assert!((a - b).abs() < 1e-15, "{w:?}");
    }
    let v = json_of(&["embezzle", "search", "--p", "0.5", "--q", "0.7", "--dim", "2"]);
    assert!(fidelity(&v) > 0.979);
}

#[test]
fn bounds_bundle() {
    let v = json_of(&["bounds", "--target", "0.85,0.08,0.07", "--seed", "0.45,0.45,0.1"]);
    let r = &v["result"];
    let (lu, lo, up) = (
        r["f_lu"].as_f64().unwrap(),
        r["f_losr_lower"].as_f64().unwrap(),
        r["sdp_upper"].as_f64().unwrap(),
    );
    assert!(lu <= lo && lo <= up + 1e-8, "{lu} {lo} {up}");
    assert!(r["hw_qubit_lower"].is_number());
}

#[test]
fn distribution_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    std::fs::write(&path, r#"{"dist": [0.85, 0.08, 0.07]}"#).unwrap();
    let a = json_of(&["--no-timing", "fidelity-lu", "--target", path.to_str().unwrap(), "--seed", "[0.45,0.45,0.1]"]);
    let b = json_of(&["--no-timing", "fidelity-lu", "--target", "0.85,0.08,0.07", "--seed", "0.45,0.45,0.1"]);
    assert_eq!(a["result"], b["result"]);

    // Unsorted input is accepted with a notice.
    let out = schmidt()
        .args(["fidelity-lu", "--target", "0.07,0.85,0.08", "--seed", "0.45,0.45,0.1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--target"));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["input"]["target"], serde_json::json!([0.85, 0.08, 0.07]));
}

#[test]
fn validation_errors_exit_2() {
    let out = schmidt()
        .args(["fidelity-lu", "--target", "0.5,abc,0.5", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--target") && err.contains("entry 1"), "{err}");
    assert_eq!(err.trim().lines().count(), 1);

    let out = schmidt().args(["fidelity-lu", "--target", "0.5,0.5", "--seed", "0.3,0.3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));

    let out = schmidt().args(["no-such-command"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = schmidt()
        .args(["fidelity-losr", "--target", "0.5,0.5", "--seed", "0.6,0.4", "--step", "0.3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--step"));
}

#[test]
fn budget_errors_exit_3() {
    let out = schmidt()
        .args(["iid-dilute", "--target", "0.6,0.4", "--d", "10", "--n", "9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn fig4_csv() {
    let out = schmidt().args(["fig4", "--p", "0.55", "--q", "0.65", "--n", "3"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,f_plain,f_lu");
    assert_eq!(lines.len(), 4);
    let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    let single = ((0.55f64 * 0.65).sqrt() + (0.45f64 * 0.35).sqrt()).powi(2);
    assert_eq!(first[0], 1.0);
    assert!((first[1] - single).abs() < 1e-11 && (first[2] - single).abs() < 1e-11);
    // 12 significant digits at most.
    for field in lines[1..].iter().flat_map(|l| l.split(',').skip(1)) {
        let digits = field.trim_start_matches("0.").trim_start_matches('0').len();
        assert!(digits <= 12, "{field}");
    }
}

#[test]
fn fig5_csv_to_file_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let path = dir.path().join(name);
        let out = schmidt()
            .args(["fig5", "--pairs", "0.5:0.7,0.6:0.8", "--dims", "1-3", "--step", "0.01", "--out"])
            .arg(&path)
            .env("SCHMIDT_BENCH_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read_to_string(path).unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("3", "b.csv");
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "pair,dim,fidelity,vdh_order");
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("0.5:0.7,1,"));
}

#[test]
fn output_is_reproducible_without_timing() {
    let args = ["--no-timing", "fidelity-losr", "--target", "0.6,0.3,0.1", "--seed", "0.5,0.3,0.2"];
    let a = schmidt().args(args).output().unwrap().stdout;
    let b = schmidt().args(args).env("SCHMIDT_BENCH_THREADS", "2").output().unwrap().stdout;
    assert_eq!(a, b);
}

#[test]
fn exact_check_and_classical() {
    let v = json_of(&["exact-check", "--target", "0.6,0.4", "--seed", "0.42,0.28,0.18,0.12"]);
    assert_eq!(v["result"]["convertible"], true);
    let z: Vec<f64> = serde_json::from_value(v["result"]["ancilla"].clone()).unwrap();
    assert!((z[0] - 0.7).abs() < 1e-9);
    let v = json_of(&["exact-check", "--target", "0.6,0.4", "--seed", "0.5,0.5"]);
    assert_eq!(v["result"]["convertible"], false);

    let v = json_of(&["embezzle", "classical-fidelity", "--target", "0.5,0.5", "--n", "2"]);
    let f = fidelity(&v);
    assert!(f > 0.0 && f <= 1.0);
    let w = json_of(&["embezzle-classical", "--target", "0.5,0.5", "--n", "2"]);
    assert_eq!(fidelity(&w), f);
}
