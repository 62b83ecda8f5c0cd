//! CLI contract tests: exit codes, output determinism, and error paths.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn tactful(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tactful"))
        .args(args)
        .output()
        .expect("spawn tactful")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// A small simulated dataset on disk, shared by the tests below.
fn simulated(dir: &Path, n: u32, seed: u32, group: &str) -> PathBuf {
    let out = dir.join(format!("responses_{group}_{n}_{seed}.csv"));
    let output = tactful(&[
        "simulate",
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--group",
        group,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "{}", stderr(&output));
    out
}

#[test]
fn predict_defaults_flip_with_temperament() {
    let output = tactful(&["predict", "--scenario", "insecure:11"]);
    assert_eq!(exit_code(&output), 0);
    let text = stdout(&output);
    assert!(text.contains("argmax: V"), "{text}");

    let output = tactful(&["predict", "--scenario", "confident:11"]);
    assert!(stdout(&output).contains("argmax: TV"));
}

#[test]
fn predict_zero_weights_are_uniform() {
    let dir = TempDir::new().unwrap();
    let params = dir.path().join("flat.json");
    fs::write(
        &params,
        r#"{
  "prior_excess": 0.1,
  "prior_virus": 0.1,
  "alpha_explanandum": 0,
  "alpha_latents": 0,
  "alpha_social_confident": 0,
  "alpha_social_insecure": 0,
  "epsilon": 0.001,
  "temperature": 1
}"#,
    )
    .unwrap();
    let output = tactful(&[
        "predict",
        "--scenario",
        "insecure:11",
        "--params",
        params.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0);
    assert_eq!(stdout(&output).matches("0.250000").count(), 4, "{}", stdout(&output));
}

#[test]
fn predict_bad_label_is_usage_error() {
    let output = tactful(&["predict", "--scenario", "nervous:11"]);
    assert_eq!(exit_code(&output), 1);
    assert!(stderr(&output).contains("usage error"));

    let output = tactful(&["predict", "--scenario", "insecure:00"]);
    assert_eq!(exit_code(&output), 1);
}

#[test]
fn missing_or_invalid_flags_are_usage_errors() {
    // No subcommand.
    assert_eq!(exit_code(&tactful(&[])), 1);
    // Unknown subcommand.
    assert_eq!(exit_code(&tactful(&["explain"])), 1);
    // Missing required flag.
    assert_eq!(exit_code(&tactful(&["predict"])), 1);
    // Invalid enum value.
    let dir = TempDir::new().unwrap();
    let data = simulated(dir.path(), 3, 1, "tactful");
    let output = tactful(&[
        "fit", "--data", data.to_str().unwrap(), "--group", "blue", "--seed", "1", "--out",
        dir.path().join("x.json").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);
    // Help exits 0.
    assert_eq!(exit_code(&tactful(&["--help"])), 0);
}

#[test]
fn unreadable_or_malformed_data_is_exit_2() {
    let dir = TempDir::new().unwrap();
    let output = tactful(&[
        "fit", "--data", dir.path().join("missing.csv").to_str().unwrap(), "--group", "tactful",
        "--seed", "1", "--out", dir.path().join("out.json").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "participant_id,group\nx,tactful\n").unwrap();
    let output = tactful(&[
        "fit", "--data", bad.to_str().unwrap(), "--group", "tactful", "--seed", "1", "--out",
        dir.path().join("out.json").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("parse error"));
}

#[test]
fn absent_group_is_exit_2_and_names_the_group() {
    let dir = TempDir::new().unwrap();
    let data = simulated(dir.path(), 3, 2, "tactful");
    let output = tactful(&[
        "export-fig", "--params", fixture("golden_params.json").to_str().unwrap(), "--data",
        data.to_str().unwrap(), "--group", "candid", "--out",
        dir.path().join("cells.csv").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("candid"), "{}", stderr(&output));
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

#[test]
fn fit_is_byte_deterministic_and_reports_lambda() {
    let dir = TempDir::new().unwrap();
    let data = simulated(dir.path(), 15, 3, "tactful");
    let before = fs::read(&data).unwrap();

    let fit_once = |out: &Path| {
        let output = tactful(&[
            "fit", "--data", data.to_str().unwrap(), "--group", "tactful", "--seed", "9",
            "--restarts", "4", "--l1", "0.005", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&output), 0, "{}", stderr(&output));
    };
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    fit_once(&out_a);
    fit_once(&out_b);

    assert_eq!(fs::read(&out_a).unwrap(), fs::read(&out_b).unwrap());
    let report_a = fs::read_to_string(dir.path().join("a.json.report.json")).unwrap();
    let report_b = fs::read_to_string(dir.path().join("b.json.report.json")).unwrap();
    assert_eq!(report_a, report_b);
    assert!(report_a.contains("\"l1_lambda\": 0.005"), "{report_a}");

    // Input files are never mutated.
    assert_eq!(fs::read(&data).unwrap(), before);

    // The fitted file is a readable parameter file.
    let params = tactful::read_params(&out_a).unwrap();
    params.validate().unwrap();
}

#[test]
fn fit_with_ablation_pins_weights() {
    let dir = TempDir::new().unwrap();
    let data = simulated(dir.path(), 12, 4, "candid");
    let out = dir.path().join("ablated.json");
    let output = tactful(&[
        "fit", "--data", data.to_str().unwrap(), "--group", "candid", "--seed", "5",
        "--restarts", "3", "--ablate", "regret+latents", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "{}", stderr(&output));
    let params = tactful::read_params(&out).unwrap();
    assert_eq!(params.alpha_social_confident, 0.0);
    assert_eq!(params.alpha_social_insecure, 0.0);
    assert_eq!(params.alpha_latents, 0.0);
    let report = fs::read_to_string(dir.path().join("ablated.json.report.json")).unwrap();
    assert!(report.contains("\"ablation\": \"regret+latents\""));
}

#[test]
fn compare_without_ablations_is_a_no_op() {
    let dir = TempDir::new().unwrap();
    let data = simulated(dir.path(), 6, 5, "tactful");
    let output = tactful(&[
        "compare", "--data", data.to_str().unwrap(), "--group", "tactful", "--seed", "2",
        "--restarts", "2",
    ]);
    assert_eq!(exit_code(&output), 0);
    assert!(stdout(&output).contains("nothing to compare"));
}

#[test]
fn compare_prints_one_row_per_ablation() {
    let dir = TempDir::new().unwrap();
    let data = simulated(dir.path(), 25, 6, "tactful");
    let output = tactful(&[
        "compare", "--data", data.to_str().unwrap(), "--group", "tactful", "--seed", "3",
        "--restarts", "4", "--ablate", "regret", "--ablate", "explanandum",
    ]);
    assert_eq!(exit_code(&output), 0, "{}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("full model:"));
    assert!(text.lines().any(|l| l.starts_with("regret ")), "{text}");
    assert!(text.lines().any(|l| l.starts_with("explanandum ")), "{text}");
}

#[test]
fn bootstrap_flag_validation_and_audit_file() {
    let dir = TempDir::new().unwrap();
    let data = simulated(dir.path(), 10, 7, "tactful");
    let out = dir.path().join("reps.csv");

    // reps below 10 is a usage error.
    let output = tactful(&[
        "bootstrap", "--data", data.to_str().unwrap(), "--group", "tactful", "--stat", "r2",
        "--reps", "1", "--seed", "1", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);

    // Unknown statistic is a usage error.
    let output = tactful(&[
        "bootstrap", "--data", data.to_str().unwrap(), "--group", "tactful", "--stat", "alpha",
        "--reps", "10", "--seed", "1", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);

    let output = tactful(&[
        "bootstrap", "--data", data.to_str().unwrap(), "--group", "tactful", "--stat", "r2",
        "--reps", "10", "--seed", "1", "--restarts", "2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "{}", stderr(&output));
    let audit = fs::read_to_string(&out).unwrap();
    assert_eq!(audit.lines().count(), 11);
    assert!(audit.starts_with("replicate,value\n"));
}

#[test]
fn bootstrap_mass_failure_is_exit_3() {
    let dir = TempDir::new().unwrap();
    let data = simulated(dir.path(), 8, 8, "tactful");
    let output = tactful(&[
        "bootstrap", "--data", data.to_str().unwrap(), "--group", "tactful", "--stat", "r2",
        "--reps", "10", "--seed", "1", "--restarts", "1", "--max-iterations", "1", "--out",
        dir.path().join("reps.csv").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 3, "{}", stderr(&output));
    assert!(stderr(&output).contains("unreliable"));
}

#[test]
fn fit_without_convergence_is_exit_3_but_writes_outputs() {
    let dir = TempDir::new().unwrap();
    let data = simulated(dir.path(), 12, 20, "tactful");
    let out = dir.path().join("unconverged.json");
    let output = tactful(&[
        "fit", "--data", data.to_str().unwrap(), "--group", "tactful", "--seed", "21",
        "--restarts", "2", "--max-iterations", "1", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 3, "{}", stderr(&output));
    assert!(stderr(&output).contains("convergence"));
    // Outputs still land on disk for inspection.
    assert!(out.exists());
    let report = fs::read_to_string(dir.path().join("unconverged.json.report.json")).unwrap();
    assert!(report.contains("\"converged\": false"));
}

#[test]
fn export_fig_without_out_flag_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let data = simulated(dir.path(), 3, 22, "tactful");
    let output = tactful(&[
        "export-fig", "--params", fixture("golden_params.json").to_str().unwrap(), "--data",
        data.to_str().unwrap(), "--group", "tactful",
    ]);
    assert_eq!(exit_code(&output), 1);
}

#[test]
fn simulate_output_reparses_with_expected_shape() {
    let dir = TempDir::new().unwrap();
    let data = simulated(dir.path(), 9, 9, "candid");
    let parsed = tactful::Dataset::from_csv_path(&data).unwrap();
    assert_eq!(parsed.len(), 9 * 6);
    assert_eq!(parsed.participants().len(), 9);
    assert!(parsed.records.iter().all(|r| r.group == tactful::Group::Candid));
}

#[test]
fn recover_reports_generating_and_recovered_params() {
    let output = tactful(&["recover", "--n", "200", "--seed", "12", "--restarts", "8"]);
    assert_eq!(exit_code(&output), 0, "{}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("generating parameters:"));
    assert!(text.contains("recovered parameters:"));
    assert_eq!(text.matches("\"alpha_social_insecure\"").count(), 2);

    let r2_line = text.lines().find(|l| l.starts_with("recovery: r2=")).expect("recovery line");
    let r2: f64 = r2_line["recovery: r2=".len()..]
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(r2 >= 0.98, "{r2_line}");
}

#[test]
fn export_fig_writes_24_rows() {
    let dir = TempDir::new().unwrap();
    let data = simulated(dir.path(), 10, 10, "tactful");
    let out = dir.path().join("cells.csv");
    let output = tactful(&[
        "export-fig", "--params", fixture("golden_params.json").to_str().unwrap(), "--data",
        data.to_str().unwrap(), "--group", "tactful", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "{}", stderr(&output));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 25);
    assert_eq!(text.lines().next().unwrap(), "scenario,utterance,empirical,model");
}

#[test]
fn interventional_mode_flag_is_accepted_everywhere() {
    let output = tactful(&[
        "predict", "--scenario", "insecure:11", "--cf-mode", "interventional",
    ]);
    assert_eq!(exit_code(&output), 0);
    // Under the interventional reading the regret gap between utterances is
    // smaller and full disclosure wins even for the insecure patient.
    assert!(stdout(&output).contains("argmax: TV"), "{}", stdout(&output));

    let output = tactful(&["predict", "--scenario", "insecure:11", "--cf-mode", "sideways"]);
    assert_eq!(exit_code(&output), 1);
}
