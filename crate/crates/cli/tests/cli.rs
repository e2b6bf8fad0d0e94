use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const META_CONFIG: &str = r#"
[experiment]
n_list = [6, 8]
replicas = 10

[experiment.schedule]
a_n = 40.0
c_n = 40.0
confinement_horizon = 40.0
"#;

fn cpsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpsim"))
        .current_dir(dir)
        .env_remove("CPSIM_EXPERIMENT__SEED")
        .args(args)
        .output()
        .unwrap()
}

fn setup(config: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("c.toml"), config).unwrap();
    dir
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn meta_smoke_writes_every_summary_field() {
    let dir = setup(META_CONFIG);
    let out = cpsim(dir.path(), &["meta", "--config", "c.toml", "--out", "run"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("run/summary.json"));
    for key in ["code_version", "config", "per_n", "c_inf", "schedules", "event_frequencies", "initial_state_note"] {
        assert!(s.get(key).is_some(), "missing {key}");
    }
    let per_n = s["per_n"].as_array().unwrap();
    assert_eq!(per_n.len(), 2);
    for k in ["beta_n", "ks_stat", "p_value", "censored_fraction", "median_log_tau"] {
        assert!(per_n[0].get(k).is_some(), "missing {k}");
    }
    assert_eq!(s["event_frequencies"].as_array().unwrap().len(), 9);
    assert_eq!(s["config"]["experiment"]["schedule"]["n_hat"], 10);
    let m = json(&dir.path().join("run/manifest.json"));
    assert_eq!(m["subcommand"], "meta");
    let header = std::fs::read_to_string(dir.path().join("run/extinction.csv")).unwrap();
    assert!(header.starts_with("N,lambda,R,seed,replica,tau,censored,extinct_type\n"));
    assert_eq!(header.lines().count(), 21);
}

#[test]
fn same_config_and_seed_give_identical_csv() {
    let dir = setup(META_CONFIG);
    for out in ["a", "b"] {
        let o = cpsim(dir.path(), &["meta", "--config", "c.toml", "--out", out, "--seed", "9", "--threads", "1"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["extinction.csv", "events.csv", "summary.json"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let c = cpsim(dir.path(), &["meta", "--config", "c.toml", "--out", "c", "--seed", "10"]);
    assert!(c.status.success());
    assert_ne!(
        std::fs::read(dir.path().join("a/extinction.csv")).unwrap(),
        std::fs::read(dir.path().join("c/extinction.csv")).unwrap()
    );
}

#[test]
fn unknown_key_is_rejected_by_name() {
    let dir = setup("[experiment]\nreplicaz = 3\n");
    let out = cpsim(dir.path(), &["extinction", "--config", "c.toml", "--out", "run"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim().lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"], "config");
    let msg = v["message"].as_str().unwrap();
    assert!(msg.contains("replicaz") && msg.contains("replicas"), "{msg}");
    assert!(!dir.path().join("run").exists());
}

#[test]
fn existing_output_needs_force() {
    let dir = setup("[simulate]\nn = 4\nt_max = 5.0\n");
    assert!(cpsim(dir.path(), &["simulate", "--config", "c.toml", "--out", "run"]).status.success());
    let again = cpsim(dir.path(), &["simulate", "--config", "c.toml", "--out", "run"]);
    assert!(!again.status.success());
    assert!(cpsim(dir.path(), &["simulate", "--config", "c.toml", "--out", "run", "--force"]).status.success());
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains(".tmp-"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn simulate_dump_round_trips() {
    let dir = setup("[simulate]\nn = 5\nt_max = 10.0\n");
    assert!(cpsim(dir.path(), &["simulate", "--config", "c.toml", "--out", "run"]).status.success());
    let bytes = std::fs::read(dir.path().join("run/construction.bin")).unwrap();
    let h = priority_cp::dump::from_bytes(&bytes).unwrap();
    let marks = std::fs::read_to_string(dir.path().join("run/marks.csv")).unwrap();
    assert_eq!(marks.lines().count(), h.marks().len() + 1);
    assert_eq!((h.window().lo(), h.window().hi()), (-4, 5));
}

#[test]
fn environment_overrides_the_file() {
    let dir = setup("[simulate]\nn = 5\nt_max = 10.0\n");
    let out = Command::new(env!("CARGO_BIN_EXE_cpsim"))
        .current_dir(dir.path())
        .env("CPSIM_SIMULATE__N", "3")
        .args(["simulate", "--config", "c.toml", "--out", "run"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let s = json(&dir.path().join("run/summary.json"));
    assert_eq!(s["config"]["simulate"]["n"], 3);
}

#[test]
fn infeasible_schedule_is_reported() {
    // the default schedule needs alpha_hat and is infeasible at small N
    let dir = setup("[experiment]\nn_list = [6, 8]\nreplicas = 2\n");
    let out = cpsim(dir.path(), &["meta", "--config", "c.toml", "--out", "run"]);
    assert!(!out.status.success());
    let v: serde_json::Value = serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert_eq!(v["error"], "invalid_parameter");
}
