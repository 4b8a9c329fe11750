use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_corsearch"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("corsearch-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn run_writes_trace() {
    let dir = scratch("run");
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"algorithm":"corpv_known","d":2,"T":200,"eps":0.1,"seed":3}"#).unwrap();
    let out = dir.join("out");
    let status = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).arg("--trace-geometry").status().unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 201);
    assert!(csv.starts_with("t,algo,layer,epoch,branch,"));
    assert!(out.join("geometry.jsonl").exists());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn seed_flag_overrides_config() {
    let dir = scratch("seed");
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"algorithm":"gd","d":2,"T":50,"eps":0.1,"seed":1}"#).unwrap();
    let read = |seed: &str, sub: &str| {
        let out = dir.join(sub);
        let s = bin().args(["run", "--config"]).arg(&cfg).args(["--seed", seed, "--out"]).arg(&out).status().unwrap();
        assert!(s.success());
        std::fs::read_to_string(out.join("trace.csv")).unwrap()
    };
    assert_eq!(read("5", "a"), read("5", "b"));
    assert_ne!(read("5", "a"), read("6", "c"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn config_errors_exit_with_two() {
    let dir = scratch("bad");
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"algorithm":"corpv_known","d":4,"T":10,"eps":0.9}"#).unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps"));
    let missing = bin().args(["run", "--config"]).arg(dir.join("nope.json")).status().unwrap();
    assert_eq!(missing.code(), Some(2));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn sweep_writes_summary() {
    let dir = scratch("sweep");
    let cfg = dir.join("sweep.json");
    std::fs::write(
        &cfg,
        r#"{"base":{"algorithm":"gd","d":2,"T":100,"eps":0.1},"grid":{"corruptions":[0,10],"seeds":[1,2]}}"#,
    )
    .unwrap();
    let out = dir.join("out");
    let status = bin().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(2).unwrap().starts_with("gd,2,0.1,10,2,0,"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(bin().arg("frobnicate").status().unwrap().code(), Some(2));
}
