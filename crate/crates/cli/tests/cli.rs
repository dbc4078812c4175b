use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gsqg(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gsqg"));
    cmd.args(args).env_remove("GSQG_THREADS");
    if let Some(t) = threads {
        cmd.env("GSQG_THREADS", t);
    }
    cmd.output().expect("spawn gsqg")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

const SMALL: &str = r#"{"params": {"alpha": 1.5}, "grid": {"n_points": 64, "length": 40.0},
    "initial": {"kind": "random", "amplitude": 0.01, "band": 6},
    "stepper": {"dt": {"fixed": 0.25}, "t_end": 2.0, "rhs_mode": "contour"},
    "diagnostics": {"sample_interval": 0.5}}"#;

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn verify_subset_passes_and_tamper_fails_by_name() {
    let ok = gsqg(&["verify", "constants", "symbols"], None);
    assert_eq!(ok.status.code(), Some(0), "{}", text(&ok.stdout));
    let out = text(&ok.stdout);
    assert!(out.contains("PASS") && !out.contains("FAIL"));
    assert!(!out.contains("rhs."), "unselected group ran");

    let bad = gsqg(&["verify", "constants", "--tamper", "constants.c_prime_at_1_5"], None);
    assert_eq!(bad.status.code(), Some(4));
    assert!(text(&bad.stdout).lines().any(|l| l.starts_with("FAIL") && l.contains("c_prime")));

    assert_eq!(gsqg(&["verify", "nonsense"], None).status.code(), Some(2));
}

#[test]
fn invalid_config_exits_two_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.json", &SMALL.replace("1.5", "2.0"));
    let out = gsqg(&["run", "--config", &path, "--out", dir.path().join("o").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("params.alpha"));
    assert_eq!(gsqg(&["run", "--preset", "no-such"], None).status.code(), Some(2));
}

#[test]
fn print_config_echoes_defaults_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "small.json", SMALL);
    let out = gsqg(&["run", "--config", &path, "--seed", "11", "--print-config"], None);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&text(&out.stdout)).unwrap();
    assert_eq!(v["seed"], 11);
    assert_eq!(v["stepper"]["slope_guard"], 0.5);
    assert!(!dir.path().join("gsqg-out").exists());
}

#[test]
fn diagnostics_match_across_processes_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "small.json", SMALL);
    let mut streams = Vec::new();
    for (k, threads) in ["1", "1", "3"].iter().enumerate() {
        let out_dir = dir.path().join(format!("run{k}"));
        let out = gsqg(&["run", "--config", &path, "--out", out_dir.to_str().unwrap()], Some(threads));
        assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
        streams.push(fs::read(out_dir.join("diagnostics.ndjson")).unwrap());
    }
    assert_eq!(streams[0], streams[1]);
    assert_eq!(streams[0], streams[2]);

    let ck = dir.path().join("run0").join("checkpoint_final.bin");
    let out = gsqg(&["inspect-checkpoint", ck.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stdout).contains("time 2"));
}

#[test]
fn blowup_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "steep.json", &SMALL.replace("\"amplitude\": 0.01", "\"amplitude\": 2.0"));
    let out_dir = dir.path().join("o");
    let out = gsqg(&["run", "--config", &path, "--out", out_dir.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(3), "{}", text(&out.stderr));
    assert!(out_dir.join("failure.json").exists());
}

#[test]
fn missing_checkpoint_is_an_io_error() {
    let out = gsqg(&["inspect-checkpoint", "/nonexistent/ck.bin"], None);
    assert_eq!(out.status.code(), Some(1));
}
