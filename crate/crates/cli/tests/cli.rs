use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bjbench(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bjbench")).args(args).current_dir(cwd).output().expect("spawn bjbench")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_writes_solution_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = bjbench(&["solve", "--preset", "benchmark", "--out", "s"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = dir.path().join("s");
    for f in ["solution.json", "strategy.txt", "dealer.csv", "summary.json"] {
        assert!(s.join(f).is_file(), "missing {f}");
    }
    let summary = json(&s.join("summary.json"));
    let ev = summary["game_ev"].as_f64().unwrap();
    assert!(ev < 0.0 && ev > -0.01);
    assert_eq!(summary["cells"].as_u64(), Some(3640));
    assert!(summary["provenance"]["config_hash"].is_string());
    let strategy = std::fs::read_to_string(s.join("strategy.txt")).unwrap();
    assert!(strategy.starts_with("# bjbench"));
}

#[test]
fn variant_summary_reports_delta() {
    let dir = tempfile::tempdir().unwrap();
    let out = bjbench(&["solve", "--preset", "h17", "--out", "h"], dir.path());
    assert!(out.status.success());
    let summary = json(&dir.path().join("h/summary.json"));
    let d = summary["variant"]["delta_vs_benchmark"].as_f64().unwrap();
    assert!(d < 0.0);
}

#[test]
fn solve_accepts_rules_file() {
    let dir = tempfile::tempdir().unwrap();
    let preset = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets/surrender.toml");
    let out = bjbench(&["solve", "--rules", preset.to_str().unwrap(), "--out", "r"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_preset_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bjbench(&["solve", "--preset", "bogus"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["benchmark", "h17", "surrender", "nodas"] {
        assert!(err.contains(name), "error should list {name}: {err}");
    }
}

#[test]
fn sub_minimum_bet_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = bjbench(&["bet", "bankroll", "--fixed", "0.5", "--seed", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn uneven_budget_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = bjbench(&["train", "cem", "--seed", "1", "--budget", "1000001"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bet_sweep_small_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = bjbench(&["bet", "sweep", "--seed", "3", "--out", "b"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let b = dir.path().join("b");
    assert!(b.join("sweep.csv").is_file() && b.join("sweep.png").is_file());
    let sweep = json(&b.join("sweep.json"));
    assert_eq!(sweep["provenance"]["seed"].as_u64(), Some(3));
}

#[test]
fn train_report_heatmaps_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = bjbench(
        &["train", "pg", "--seed", "5", "--budget", "20000", "--checkpoint-every", "10000", "--out", "runs/pg-seed5"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("runs/pg-seed5");
    for f in ["policy.json", "curve.csv", "curve.png", "regret.csv", "report.json"] {
        assert!(run.join(f).is_file(), "missing {f}");
    }
    assert!(std::fs::read_dir(run.join("checkpoints")).unwrap().count() >= 2);
    let report = json(&run.join("report.json"));
    let amr = report["run"]["summary"]["amr"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&amr));
    assert_eq!(report["provenance"]["seed"].as_u64(), Some(5));

    let out = bjbench(&["report", "--runs", "runs", "--out", "cmp"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("cmp/comparison.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("pg,")));
    assert!(csv.lines().any(|l| l.starts_with("oracle,")));

    let policy = run.join("policy.json");
    let out = bjbench(&["heatmaps", "--policy", policy.to_str().unwrap(), "--out", "hm"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for chart in ["hard", "soft", "pair"] {
        assert!(dir.path().join(format!("hm/{chart}.csv")).is_file());
        assert!(dir.path().join(format!("hm/{chart}.png")).is_file());
    }
}
