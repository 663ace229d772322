//! End-to-end checks of the command-line surface: flag handling, exit
//! codes, and the files each subcommand leaves behind.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_tactus")
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/scenarios")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn expect_success(dir: &Path, args: &[&str]) -> String {
    let output = run_in(dir, args);
    assert!(
        output.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8_lossy(&output.stdout).into_owned()
}

/// Generate a small working set: three scenario kinds, four traces.
fn generate_fixture(dir: &Path) {
    let scenarios = scenarios();
    let gen = |spec: &str, out: &str, seed: &str| {
        expect_success(
            dir,
            &[
                "gen",
                "--spec",
                scenarios.join(spec).to_str().unwrap(),
                "--out",
                out,
                "--seed",
                seed,
            ],
        )
    };
    gen("manipulation.toml", "m1.trace", "501");
    gen("manipulation.toml", "m2.trace", "502");
    gen("distracted.toml", "d1.trace", "503");
    gen("collision.toml", "c1.trace", "504");
}

#[test]
fn full_walkthrough_produces_consistent_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    generate_fixture(dir.path());

    // gen prints the summary line.
    let out = expect_success(
        dir.path(),
        &[
            "gen",
            "--spec",
            scenarios().join("idle.toml").to_str().unwrap(),
            "--out",
            "i1.trace",
            "--seed",
            "505",
        ],
    );
    assert!(out.contains("frames=") && out.contains("positives="));

    // train writes a loadable model with the mask baked in.
    expect_success(
        dir.path(),
        &[
            "train",
            "--traces",
            "*.trace",
            "--model",
            "knn",
            "--k",
            "11",
            "--features",
            "TS,HP,GA",
            "--out",
            "model.json",
            "--seed",
            "3",
        ],
    );
    let model: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("model.json")).unwrap())
            .unwrap();
    assert_eq!(model["kind"], "knn");
    assert_eq!(model["format_version"], 1);
    assert_eq!(model["knn"]["k"], 11);

    // eval (retrain) prints a table whose accuracy satisfies the count
    // identity.
    let out = expect_success(
        dir.path(),
        &[
            "eval",
            "--traces",
            "*.trace",
            "--retrain",
            "--folds",
            "5",
            "--seed",
            "3",
            "--out",
            "report.json",
        ],
    );
    assert!(out.contains("accuracy"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let row = &report["rows"][0];
    let (tp, tn, fp, fn_) = (
        row["tp"].as_u64().unwrap(),
        row["tn"].as_u64().unwrap(),
        row["fp"].as_u64().unwrap(),
        row["fn"].as_u64().unwrap(),
    );
    let accuracy = row["accuracy"].as_f64().unwrap();
    let identity = (tp + tn) as f64 / (tp + tn + fp + fn_) as f64;
    assert!((accuracy - identity).abs() < 1e-12);
    assert!(!report["corpus_hash"].as_str().unwrap().is_empty());

    // eval with the stored model.
    let out = expect_success(
        dir.path(),
        &[
            "eval",
            "--traces",
            "*.trace",
            "--model",
            "model.json",
            "--out",
            "report_model.json",
        ],
    );
    assert!(out.contains("knn"));

    // ablate with the default mask list: seven rows, sorted by accuracy.
    expect_success(
        dir.path(),
        &[
            "ablate",
            "--traces",
            "*.trace",
            "--k",
            "11",
            "--seed",
            "3",
            "--out",
            "ablation.json",
        ],
    );
    let ablation: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ablation.json")).unwrap())
            .unwrap();
    let rows = ablation["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 7, "default study runs the seven-row mask list");
    let accuracies: Vec<f64> = rows
        .iter()
        .map(|r| r["accuracy"].as_f64().unwrap())
        .collect();
    assert!(
        accuracies.windows(2).all(|w| w[0] >= w[1]),
        "rows must be sorted"
    );

    // replay + export-plot; the CSV has one row per frame plus a header.
    expect_success(
        dir.path(),
        &[
            "replay",
            "--trace",
            "d1.trace",
            "--model",
            "model.json",
            "--control",
            "--window",
            "1.0",
            "--out",
            "log.jsonl",
        ],
    );
    expect_success(
        dir.path(),
        &["export-plot", "--log", "log.jsonl", "--out", "plot.csv"],
    );
    let trace_lines = std::fs::read_to_string(dir.path().join("d1.trace"))
        .unwrap()
        .lines()
        .count();
    let csv = std::fs::read_to_string(dir.path().join("plot.csv")).unwrap();
    let csv_lines: Vec<&str> = csv.lines().collect();
    assert_eq!(csv_lines.len(), trace_lines, "header + one row per frame");
    assert!(csv_lines[0].starts_with("t,gamma,d,d_dot,alpha,alpha_dot"));
    assert!(csv_lines[0].contains("intention"));
    assert!(csv_lines[0].contains("ee_speed"));
}

#[test]
fn single_mask_ablation_yields_single_row() {
    let dir = tempfile::tempdir().unwrap();
    generate_fixture(dir.path());
    expect_success(
        dir.path(),
        &[
            "ablate",
            "--traces",
            "*.trace",
            "--masks",
            "TS,HP;GA",
            "--seed",
            "1",
            "--out",
            "two_rows.json",
        ],
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("two_rows.json")).unwrap())
            .unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn usage_and_runtime_errors_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    generate_fixture(dir.path());

    // Missing spec file: config error, exit 2.
    let output = run_in(
        dir.path(),
        &["gen", "--spec", "missing.toml", "--out", "x.trace"],
    );
    assert_eq!(output.status.code(), Some(2));

    // Even k: model parameter error, exit 1.
    let output = run_in(
        dir.path(),
        &[
            "train", "--traces", "*.trace", "--k", "12", "--out", "m.json",
        ],
    );
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("odd"));

    // Unknown flag: clap usage error, exit 2.
    let output = run_in(dir.path(), &["gen", "--nonsense"]);
    assert_eq!(output.status.code(), Some(2));

    // Glob matching nothing: config error, exit 2.
    let output = run_in(
        dir.path(),
        &["train", "--traces", "nothing/*.trace", "--out", "m.json"],
    );
    assert_eq!(output.status.code(), Some(2));

    // eval needs exactly one of --model/--retrain.
    let output = run_in(dir.path(), &["eval", "--traces", "*.trace"]);
    assert_eq!(output.status.code(), Some(2));

    // Bad config file: exit 2.
    std::fs::write(dir.path().join("broken.toml"), "format_version = 99").unwrap();
    let output = run_in(
        dir.path(),
        &[
            "--config",
            "broken.toml",
            "gen",
            "--spec",
            scenarios().join("idle.toml").to_str().unwrap(),
            "--out",
            "x.trace",
        ],
    );
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn config_path_env_var_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    // An intentionally broken config through CONFIG_PATH must be picked up
    // (and rejected), proving the fallback order.
    std::fs::write(dir.path().join("env.toml"), "not valid toml [").unwrap();
    let output = Command::new(bin())
        .args([
            "gen",
            "--spec",
            scenarios().join("idle.toml").to_str().unwrap(),
            "--out",
            "x.trace",
        ])
        .env("CONFIG_PATH", dir.path().join("env.toml"))
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("config"));
}

#[test]
fn seed_flag_overrides_the_spec_seed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = scenarios().join("manipulation.toml");
    expect_success(
        dir.path(),
        &[
            "gen",
            "--spec",
            spec.to_str().unwrap(),
            "--out",
            "a.trace",
            "--seed",
            "1",
        ],
    );
    expect_success(
        dir.path(),
        &[
            "gen",
            "--spec",
            spec.to_str().unwrap(),
            "--out",
            "b.trace",
            "--seed",
            "2",
        ],
    );
    let a = std::fs::read(dir.path().join("a.trace")).unwrap();
    let b = std::fs::read(dir.path().join("b.trace")).unwrap();
    assert_ne!(a, b, "different seeds must change the trace");
}
