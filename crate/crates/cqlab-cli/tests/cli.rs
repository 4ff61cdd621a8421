//! End-to-end tests of the `cqlab` binary: exit codes, file outputs, and
//! record replay.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cqlab"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cqlab-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn presets_lists_known_capacities() {
    let out = bin().arg("presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["orthogonal-pure", "identical-states", "bsc", "two-pure-overlap", "trine"] {
        assert!(text.contains(name), "missing preset {name}");
    }
}

#[test]
fn capacity_on_preset_and_channel_file() {
    let out = bin()
        .args(["capacity", "--preset", "orthogonal-pure"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0.693147"), "stdout: {text}");

    // Same channel via an explicit file.
    let dir = temp_dir("capfile");
    let file = dir.join("chan.json");
    std::fs::write(
        &file,
        r#"{
  "dim": 2,
  "inputs": [
    {"label": "x0", "state": [[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0]]]},
    {"label": "x1", "state": [[[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]}
  ]
}"#,
    )
    .unwrap();
    let out = bin()
        .args(["capacity", "--channel"])
        .arg(&file)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("0.693147"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn constrained_capacity_reports_budget() {
    let dir = temp_dir("cost");
    let file = dir.join("chan.json");
    std::fs::write(
        &file,
        r#"{
  "dim": 2,
  "inputs": [
    {"label": "x0", "state": [[[0.9,0.0],[0.0,0.0]],[[0.0,0.0],[0.1,0.0]]], "cost": 0.0},
    {"label": "x1", "state": [[[0.1,0.0],[0.0,0.0]],[[0.0,0.0],[0.9,0.0]]], "cost": 1.0}
  ],
  "budget": 0.3
}"#,
    )
    .unwrap();
    let out = bin()
        .args(["capacity", "--channel"])
        .arg(&file)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("E[c]"), "stdout: {text}");
    assert!(text.contains("active"), "stdout: {text}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sweep_writes_csv_file() {
    let dir = temp_dir("sweep");
    let csv = dir.join("out.csv");
    let out = bin()
        .args([
            "sweep",
            "--preset",
            "bsc",
            "--kind",
            "divergence",
            "--states",
            "x0,x1",
            "--n",
            "1,2",
            "--thresholds",
            "0.0:0.8:5",
            "--csv",
        ])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("kind,n,threshold,tail\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 5);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("finite-n bracket"), "bracket label missing");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn simulate_honors_seed() {
    let run = || {
        let out = bin()
            .args([
                "simulate",
                "--preset",
                "orthogonal-pure",
                "--n",
                "2",
                "--code-size",
                "2",
                "--trials",
                "20",
                "--seed",
                "9",
                "--a",
                "0.4",
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8_lossy(&out.stdout).to_string()
    };
    assert_eq!(run(), run());
}

#[test]
fn replay_round_trip_is_identical() {
    let dir = temp_dir("replay");
    let record = dir.join("record.json");
    let out = bin()
        .args([
            "--out",
            record.to_str().unwrap(),
            "simulate",
            "--preset",
            "bsc",
            "--n",
            "3",
            "--code-size",
            "4",
            "--trials",
            "30",
            "--seed",
            "123",
            "--a",
            "0.2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = bin().arg("replay").arg(&record).output().unwrap();
    assert!(out.status.success(), "replay diverged");
    assert!(String::from_utf8_lossy(&out.stdout).contains("bit-identical"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_code_one_on_injected_defect_with_witness() {
    let dir = temp_dir("witness");
    let out = bin()
        .args([
            "verify",
            "--suite",
            "lemma2",
            "--count",
            "50",
            "--adversarial",
            "5",
            "--dims",
            "2:4",
            "--inject-defect",
            "--witness-dir",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let witnesses: Vec<_> = std::fs::read_dir(&dir).unwrap().collect();
    assert!(!witnesses.is_empty(), "no witness files written");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_clean_passes() {
    let out = bin()
        .args([
            "verify",
            "--suite",
            "neyman-pearson",
            "--count",
            "200",
            "--adversarial",
            "10",
            "--dims",
            "2:5",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("pass"));
}

#[test]
fn verify_zero_count_warns_vacuous() {
    let out = bin()
        .args(["verify", "--suite", "lemma2", "--count", "0", "--adversarial", "0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("vacuous"));
}

#[test]
fn exit_code_two_on_usage_errors() {
    // Unknown preset.
    let out = bin()
        .args(["capacity", "--preset", "not-a-channel"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Missing channel entirely (clap-level usage error).
    let out = bin().args(["capacity"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Decoder parameters missing.
    let out = bin()
        .args([
            "simulate",
            "--preset",
            "bsc",
            "--n",
            "2",
            "--code-size",
            "2",
            "--decoder",
            "hsw",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_code_three_on_resource_bound() {
    // 2^40 dimensions cannot be materialized.
    let out = bin()
        .args([
            "sweep",
            "--preset",
            "orthogonal-pure",
            "--kind",
            "info",
            "--n",
            "40",
            "--thresholds",
            "0.1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn exponent_emits_curve() {
    let out = bin()
        .args([
            "exponent",
            "--preset",
            "bsc",
            "--mode",
            "phi-bar",
            "--range",
            "0.05:0.25:3",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("a,phi_bar,t_star"));
    assert_eq!(text.lines().count(), 4);
}
