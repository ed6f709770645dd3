//! Command-line interface checks: exit codes, output formats, and the
//! determinism/caching contract.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_charmat"))
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("charmat-cli-{}-{}", name, std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn grp_info_reports_orders() {
    let out = bin()
        .args(["grp", "info", "--n", "1", "--q", "3", "--kind", "nonsplit", "--no-cache"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["orders"]["G"], 48);
    assert_eq!(v["report"]["orders"]["H"], 8);
    assert_eq!(v["report"]["orders"]["Hflat"], 4);
    assert!(v["field"]["ext"]["q"] == 9);
}

#[test]
fn verify_main_exits_zero_and_text_uses_math_names() {
    let out = bin()
        .args([
            "verify", "main", "--n", "1", "--q", "3", "--kind", "nonsplit", "--format", "text",
            "--no-cache",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("m_alpha"));
    assert!(text.contains("X_pi"));
    assert!(text.contains("Z_pi"));
    assert!(text.contains("pass: true"));
}

#[test]
fn verify_main_q4_prime_power_accepted() {
    let out = bin()
        .args(["verify", "main", "--n", "1", "--q", "4", "--kind", "nonsplit", "--no-cache"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn out_of_budget_configs_exit_two() {
    let out = bin()
        .args(["verify", "main", "--n", "2", "--q", "11", "--kind", "nonsplit", "--no-cache"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("enumeration budget"), "stderr: {}", err);
    // the stretch case is refused explicitly, not skipped
    let out = bin()
        .args(["verify", "main", "--n", "2", "--q", "3", "--kind", "nonsplit", "--no-cache"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stretch"));
}

#[test]
fn classes_gl4_f3_without_carrier() {
    let out = bin()
        .args(["classes", "--group", "gl", "--n", "4", "--q", "3", "--no-cache"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["order"], 24261120);
    let entries = v["report"]["entries"].as_array().unwrap();
    let total: u64 = entries.iter().map(|e| e["size"].as_u64().unwrap()).sum();
    assert_eq!(total, 24261120);
}

#[test]
fn chartab_gap_style_renders() {
    let out = bin()
        .args(["chartab", "--group", "gl", "--n", "2", "--q", "3", "--gap-style", "--no-cache"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("GL(2,3)"));
}

#[test]
fn orbits_match_counts() {
    let out = bin().args(["orbits", "--k", "2", "--q", "2", "--no-cache"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let sizes: Vec<u64> = v["report"]["orbits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["size"].as_u64().unwrap())
        .collect();
    assert_eq!(sizes, vec![5, 30]);
}

#[test]
fn conjecture_split_control_is_not_a_failure() {
    let out = bin()
        .args(["conjecture", "--q", "3", "--kind", "split", "--no-cache"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["report"]["max_dim"].as_u64().unwrap() >= 2);
    assert!(!v["report"]["witnesses"].as_array().unwrap().is_empty());
    // nonsplit must be clean
    let out = bin()
        .args(["conjecture", "--q", "3", "--kind", "nonsplit", "--no-cache"])
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn reports_are_deterministic_and_cache_neutral() {
    let dir = tmpdir("determinism");
    let cache = dir.join("cache");
    let run = |out_path: &PathBuf| {
        let st = bin()
            .args([
                "verify", "main", "--n", "1", "--q", "3", "--kind", "nonsplit",
                "--seed", "0",
            ])
            .arg("--cache-dir")
            .arg(&cache)
            .arg("--out")
            .arg(out_path)
            .status()
            .unwrap();
        assert!(st.success());
    };
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    let c = dir.join("c.json");
    run(&a); // cold cache
    run(&b); // warm cache
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    std::fs::remove_dir_all(&cache).unwrap();
    run(&c); // wiped cache
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn jsonl_audit_log_appends() {
    let dir = tmpdir("jsonl");
    let log = dir.join("audit.jsonl");
    for _ in 0..2 {
        let st = bin()
            .args(["verify", "main", "--n", "1", "--q", "3", "--kind", "split", "--no-cache"])
            .arg("--jsonl")
            .arg(&log)
            .arg("--out")
            .arg(dir.join("r.json"))
            .status()
            .unwrap();
        assert!(st.success());
    }
    let text = std::fs::read_to_string(&log).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.len() >= 2);
    assert_eq!(lines.len() % 2, 0, "append-only log must double after a second run");
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["assert"], "main_formula");
        assert_eq!(v["pass"], true);
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn mackey_cli_both_shapes_q2() {
    for shape in ["22", "13"] {
        let out = bin()
            .args(["mackey", "verify", "--shape", shape, "--q", "2", "--no-cache"])
            .output()
            .unwrap();
        assert!(out.status.success(), "shape {}", shape);
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["report"]["pass"], true);
    }
}
