use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mae-sampling"));
    c.env_remove("MAE_SAMPLING_THREADS").env_remove("RUST_LOG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn sine(dir: &Path, t_end: &str) -> PathBuf {
    let path = dir.join("sine.csv");
    let out = run(&["gen-data", "--t-end", t_end, "--out", s(&path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn gen_data_writes_both_reference_waves() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("f1.csv");
    let out = run(&[
        "gen-data", "--amplitude", "1", "--frequency", "1", "--phase", "0", "--rate", "10",
        "--t-end", "100", "--out", s(&first),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&first).unwrap();
    assert_eq!(text.lines().next(), Some("y"));
    assert_eq!(text.lines().count(), 1001);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("f1.csv.json")).unwrap()).unwrap();
    assert_eq!(meta["sine"]["frequency"], 1.0);

    let second = dir.path().join("f3.csv");
    assert!(run(&["gen-data", "--frequency", "3", "--t-end", "10", "--out", s(&second)])
        .status
        .success());
    assert_eq!(std::fs::read_to_string(&second).unwrap().lines().count(), 101);
}

#[test]
fn usage_errors_exit_with_two() {
    let out = run(&["gen-data", "--frequency", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--out"));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sample", "--data", "/nonexistent.csv", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonexistent"));
}

fn sample_at(threads: &str, data: &Path, out: &Path) -> Vec<u8> {
    let o = run(&[
        "--threads", threads, "sample", "--data", s(data), "--nc", "1..4", "--lb", "6",
        "--samples", "25", "--seed", "11", "--out", s(out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(out.join("outcomes.csv")).unwrap()
}

#[test]
fn sampling_is_thread_count_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let data = sine(dir.path(), "20");
    let max = std::thread::available_parallelism().map_or(4, |n| n.get()).max(3);
    let one = sample_at("1", &data, &dir.path().join("t1"));
    let two = sample_at("2", &data, &dir.path().join("t2"));
    let many = sample_at(&max.to_string(), &data, &dir.path().join("tmax"));
    assert_eq!(one, two);
    assert_eq!(one, many);
    assert_eq!(String::from_utf8(one).unwrap().lines().count(), 5);

    // Environment variable default gives the same bytes too.
    let envdir = dir.path().join("env");
    let o = bin()
        .env("MAE_SAMPLING_THREADS", "2")
        .args(["sample", "--data", s(&data), "--nc", "1..4", "--lb", "6", "--samples", "25"])
        .args(["--seed", "11", "--out", s(&envdir)])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(std::fs::read(envdir.join("outcomes.csv")).unwrap(), two);

    let ranking = std::fs::read_to_string(dir.path().join("t1/ranking.csv")).unwrap();
    assert!(ranking.starts_with("rank,arch_id,nc,lb,p_t,log_p_t,decile"));
    let config: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("t1/config.json")).unwrap()).unwrap();
    assert_eq!(config["sampling"]["seed"], 11);
    assert_eq!(config["sampling"]["max_samples"], 25);
}

#[test]
fn partial_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let data = sine(dir.path(), "3");
    let out = dir.path().join("o");
    let o = run(&[
        "sample", "--data", s(&data), "--nc", "1..2", "--lb", "4,500", "--samples", "5",
        "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lb=500"));
    let outcomes = std::fs::read_to_string(out.join("outcomes.csv")).unwrap();
    assert_eq!(outcomes.lines().count(), 3);
    let config: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(config["failures"].as_array().unwrap().len(), 2);
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn exported_weights_warm_start_training() {
    let dir = tempfile::tempdir().unwrap();
    let data = sine(dir.path(), "20");
    let out = dir.path().join("s");
    let o = run(&[
        "sample", "--data", s(&data), "--nc", "3", "--lb", "5", "--samples", "30",
        "--out", s(&out), "--export-best-weights",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let outcomes = std::fs::read_to_string(out.join("outcomes.csv")).unwrap();
    let row: Vec<&str> = outcomes.lines().nth(1).unwrap().split(',').collect();
    let best_mae: f64 = row[8].parse().unwrap();

    let weights = out.join("weights/best_nc3_lb5.w");
    let json = dir.path().join("train.json");
    let o = run(&[
        "train", "--data", s(&data), "--init-weights", s(&weights), "--epochs", "3",
        "--out", s(&json),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&json);
    let initial = v["summary"]["initial_test_mae"].as_f64().unwrap();
    assert!((initial - best_mae).abs() <= 1e-12, "{initial} vs {best_mae}");
    assert_eq!(v["summary"]["arch"]["nc"], 3);

    let o = run(&[
        "train", "--data", s(&data), "--init-weights", s(&weights), "--nc", "4",
        "--out", s(&json),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nc"));
}

#[test]
fn train_history_and_zero_epochs() {
    let dir = tempfile::tempdir().unwrap();
    let data = sine(dir.path(), "12");
    let json = dir.path().join("t.json");
    let weights = dir.path().join("final.w");
    let o = run(&[
        "train", "--data", s(&data), "--nc", "4", "--lb", "6", "--epochs", "7", "--seed", "7",
        "--out", s(&json), "--export-weights", s(&weights),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&json);
    assert_eq!(v["summary"]["train_mae_history"].as_array().unwrap().len(), 7);
    assert_eq!(v["summary"]["config"]["seed"], 7);
    assert!(weights.exists());

    let o = run(&[
        "train", "--data", s(&data), "--nc", "4", "--lb", "6", "--epochs", "0", "--out", s(&json),
    ]);
    assert!(o.status.success());
    let v = read_json(&json);
    assert_eq!(v["summary"]["test_mae"], v["summary"]["initial_test_mae"]);
    assert!(v["summary"]["train_mae_history"].as_array().unwrap().is_empty());

    let o = run(&["train", "--data", s(&data), "--lb", "6", "--out", s(&json)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--nc"));
}

const SMALL_PLAN: &str = r#"{
    "seed": 3,
    "data": {"csv": {"path": "sine.csv"}},
    "grid": {"nc": "1..10", "lb": "4"},
    "sampling": {"max_samples": 10, "threshold": 0.01},
    "training": {"epochs": 2},
    "per_decile": 1,
    "repetitions": 2,
    "fit_fraction": 0.5
}"#;

#[test]
fn experiment_dry_run_and_full_run() {
    let dir = tempfile::tempdir().unwrap();
    sine(dir.path(), "8");
    let plan = dir.path().join("plan.json");
    std::fs::write(&plan, SMALL_PLAN).unwrap();
    let out = dir.path().join("report");

    let o = run(&["experiment", "--plan", s(&plan), "--out", s(&out), "--dry-run"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let printed: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed["grid"].as_array().unwrap().len(), 10);
    assert!(!out.exists());

    let o = run(&["experiment", "--plan", s(&plan), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["report.json", "outcomes.csv", "trained.csv", "model_eval.csv"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["plan"]["seed"], 3);
    assert_eq!(report["model_eval"].as_array().unwrap().len(), 2);
}

#[test]
fn malformed_plans_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let cases = [
        (SMALL_PLAN.replace("\"per_decile\": 1", "\"per_decile\": 0"), "per_decile"),
        (SMALL_PLAN.replace("\"repetitions\"", "\"repetitons\""), "repetitons"),
        (SMALL_PLAN.replace("\"seed\": 3,", ""), "seed"),
        (SMALL_PLAN.replace("1..10", "1..3"), "grid"),
        (SMALL_PLAN.replace("\"fit_fraction\": 0.5", "\"fit_fraction\": 1.5"), "fit_fraction"),
    ];
    sine(dir.path(), "8");
    for (text, field) in cases {
        std::fs::write(&plan, text).unwrap();
        let o = run(&["experiment", "--plan", s(&plan), "--dry-run"]);
        assert_eq!(o.status.code(), Some(1), "{field}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(field), "expected `{field}` in: {err}");
    }
}
