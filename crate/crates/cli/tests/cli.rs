use std::path::Path;
use std::process::{Command, Output};

fn majcolor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_majcolor")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn build_then_validate_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let layout = dir.path().join("d5.json");
    let o = majcolor(&["build", "--d", "5", "--out", p(&layout)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = majcolor(&["validate", "--layout", p(&layout)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("PASS"));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn validate_json_is_machine_readable() {
    let o = majcolor(&["validate", "--d", "9", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn distance_matches_d() {
    let o = majcolor(&["distance", "--d", "5,9"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("d = 9: minimum logical weight 9"));
}

#[test]
fn surgery_types_verify() {
    for t in ["1", "2", "pp"] {
        let o = majcolor(&["verify-surgery", "--d", "5", "--type", t]);
        assert_eq!(code(&o), 0, "type {t}:\n{}", stdout(&o));
    }
}

#[test]
fn circuits_verify() {
    let o = majcolor(&["verify-circuits"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("stabilizer measurement circuit"));
}

#[test]
fn noiseless_histories_decode_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.bin");
    let o = majcolor(&["simulate", "--d", "5", "--eps", "0", "--shots", "20", "--out", p(&h)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("20 without any flip"));
    let o = majcolor(&["decode", "--input", p(&h), "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["failures"], 0);
    assert_eq!(v["header"]["rounds"], 5);
}

#[test]
fn noisy_histories_decode() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.bin");
    let o = majcolor(&["simulate", "--d", "5", "--pp", "0.01", "--rounds", "3", "--shots", "200", "--seed", "4", "--out", p(&h)]);
    assert_eq!(code(&o), 0);
    let o = majcolor(&["decode", "--input", p(&h)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("200 shots, d = 5, 3 rounds"));
}

#[test]
fn threshold_csv_is_deterministic_and_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"d_list": [5, 9], "eps_list": [0.002], "shots": 50, "seed": 3}"#).unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = majcolor(&["threshold", "--config", p(&cfg), "--shots", "40", "--out", p(&out), "-q"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("d,epsilon,pp_rate,rounds,shots,failures,rate_per_round,ci_low,ci_high,seed"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("5,") && rows[1].starts_with("9,"));
    assert!(rows.iter().all(|r| r.split(',').nth(4) == Some("40")));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&majcolor(&["build", "--d", "7"])), 2);
    assert_eq!(code(&majcolor(&["verify-surgery", "--type", "3"])), 2);
    assert_eq!(code(&majcolor(&["threshold", "--pp-list", "0.5", "--shots", "1"])), 2);
    assert_eq!(code(&majcolor(&["decode", "--input", "/nonexistent/h.bin"])), 2);
    assert_eq!(code(&majcolor(&["frobnicate"])), 2);
}
