use std::path::Path;
use std::process::{Command, Output};

use mfg_core::equilibrium::output::load_equilibria;
use mfg_core::EquilibriumKind;

fn mfg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfg"))
        .args(args)
        .current_dir(dir)
        .env("MFG_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn consumer_example_solve_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = mfg(
        dir.path(),
        &[
            "example",
            "consumer",
            "--b",
            "1",
            "--epsilon",
            "0.2",
            "--beta",
            "0.5",
            "--c",
            "0.5",
            "--s1",
            "0",
            "--s2",
            "0",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(dir.path().join("consumer.json").exists());
    assert!(dir.path().join("consumer.reference.json").exists());

    let out = mfg(dir.path(), &["solve", "consumer.json", "-o", "eq.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let file = load_equilibria(dir.path().join("eq.json")).unwrap();
    assert_eq!(file.equilibria.len(), 5);
    let mixed = file.equilibria.iter().filter(|r| r.kind == EquilibriumKind::Mixed).count();
    assert_eq!(mixed, 2);
    assert!(file.warnings.is_empty());
    // supports are written 1-based
    assert_eq!(file.equilibria[0].strategy_support, vec![vec![1], vec![2]]);

    let out = mfg(dir.path(), &["verify", "consumer.json", "eq.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.contains(" ok ")).count(), 5);
}

#[test]
fn solve_without_flags_writes_stdout() {
    let dir = tempfile::tempdir().unwrap();
    assert!(mfg(dir.path(), &["example", "consumer", "--c", "10"]).status.success());
    let out = mfg(dir.path(), &["solve", "consumer.json"]);
    assert_eq!(out.status.code(), Some(0));
    let file = mfg_core::equilibrium::output::parse_equilibria(&stdout(&out)).unwrap();
    assert_eq!(file.equilibria.len(), 1);
    assert_eq!(file.equilibria[0].m, vec![0.5, 0.5]);
}

#[test]
fn verify_detects_tampered_record() {
    let dir = tempfile::tempdir().unwrap();
    assert!(mfg(dir.path(), &["example", "consumer"]).status.success());
    // (1/6, 5/6) is not stationary under stay×stay
    let text = r#"{"equilibria": [{"m": [0.166666666667, 0.833333333333], "pi": [[0, 1], [0, 1]],
        "kind": "pure", "stationarity_residual": 0, "optimality_gap": 0, "strategy_support": [[2], [2]]}]}"#;
    std::fs::write(dir.path().join("bad.json"), text).unwrap();
    let out = mfg(dir.path(), &["verify", "consumer.json", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn corruption_value_above_threshold() {
    let dir = tempfile::tempdir().unwrap();
    assert!(mfg(dir.path(), &["example", "corruption"]).status.success());
    let out = mfg(dir.path(), &["value", "corruption.json", "--m", "0.2,0.5,0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("O_1 (C) = {change}"), "{text}");
    assert!(text.contains("O_2 (H) = {stay}"), "{text}");
    assert!(text.contains("D(m) = {change×stay×change, change×stay×stay}"), "{text}");
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = mfg(dir.path(), &["solve", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"states": 2, "actions": 1, "beta": 0.5, "rates": [{"i": 3, "j": 1, "a": 1, "poly": []}]}"#,
    )
    .unwrap();
    let out = mfg(dir.path(), &["validate", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("rates[0].i"), "{}", stderr(&out));

    assert!(mfg(dir.path(), &["example", "consumer"]).status.success());
    let out = mfg(dir.path(), &["solve", "consumer.json", "--damping", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("damping"));
    let out = mfg(dir.path(), &["value", "consumer.json", "--m", "0.2,0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--m"));
    let out = mfg(dir.path(), &["example", "consumer", "--epsilon", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("epsilon"));
}

#[test]
fn validate_reports_negative_rate() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"states": 2, "actions": 1, "beta": 0.5,
        "rates": [{"i": 1, "j": 2, "a": 1, "poly": [{"coef": 1.0}, {"coef": -2.0, "powers": [1, 0]}]},
                  {"i": 2, "j": 1, "a": 1, "poly": [{"coef": 1.0}]}],
        "rewards": []}"#;
    std::fs::write(dir.path().join("neg.json"), text).unwrap();
    let out = mfg(dir.path(), &["validate", "neg.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("negative off-diagonal Q[1,2,1]"), "{}", stdout(&out));
}

#[test]
fn bad_thread_env_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    assert!(mfg(dir.path(), &["example", "consumer"]).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_mfg"))
        .args(["solve", "consumer.json"])
        .current_dir(dir.path())
        .env("MFG_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("MFG_THREADS"));
}
