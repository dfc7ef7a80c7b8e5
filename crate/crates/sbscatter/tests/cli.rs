use std::path::PathBuf;
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sbscatter-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbscatter")).args(args).output().unwrap()
}

#[test]
fn estimates_run_is_deterministic_and_passes() {
    let dir = scratch("det");
    let (a, b) = (dir.join("a"), dir.join("b"));
    for out in [&a, &b] {
        let o = run(&["estimates", "--set", "estimates.trials=10", "--set", "seed=5", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["estimates.json", "estimates_single_mode.csv"] {
        let x = std::fs::read(a.join(file)).unwrap();
        assert_eq!(x, std::fs::read(b.join(file)).unwrap(), "{file} differs between runs");
    }
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("estimates.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["seed"], 5);
    assert_eq!(json["report"]["complete"], true);
    let text = std::fs::read_to_string(a.join("estimates.json")).unwrap();
    assert!(text.contains("\"tol\": 1.0000000000000000e-10"));
}

#[test]
fn failing_check_gives_exit_one() {
    let dir = scratch("fail");
    let o = run(&["estimates", "--set", "estimates.trials=5", "--set", "estimates.tol=-0.5", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[FAIL]"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = scratch("unknown");
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "[model]\ng = 0.05\nwidth = 3\n").unwrap();
    let o = run(&["estimates", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("width"), "{err}");
}

#[test]
fn invalid_override_is_rejected() {
    let dir = scratch("invalid");
    let o = run(&["estimates", "--set", "model.mu=0.7", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mu"));
    let o = run(&["nonsense", "--out", dir.to_str().unwrap()]);
    assert!(!o.status.success());
}
