//! Smoke tests of the `apcast` binary: stage verbs, exit codes, predict.

use std::fs;
use std::path::Path;
use std::process::Command;

fn apcast() -> Command {
    Command::new(env!("CARGO_BIN_EXE_apcast"))
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let config = dir.join("config.toml");
    fs::write(
        &config,
        format!(
            r#"
seed = 5
model_kinds = ["lstm"]
metrics = ["traffic"]
measurements = "{m}"
out_dir = "{out}"
max_lag = 6
refit_stride = 1000
record_timings = false

[train]
epochs = 2
batch_size = 16
learning_rate = 0.002
seed = 5

[synth]
ap_count = 3
day_count = 10
coupling = 0.8
missing_prob = 0.0
"#,
            m = dir.join("m.csv").display(),
            out = dir.join("out").display(),
        ),
    )
    .unwrap();
    config
}

#[test]
fn full_stage_sequence_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());

    for verb in ["synth", "preprocess", "correlate", "train", "evaluate"] {
        let output = apcast()
            .args([verb, "--config"])
            .arg(&config)
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "{verb} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
    assert!(tmp.path().join("out/evaluate/traffic/summary.csv").exists());

    // `run` over the same input reproduces the same summary bytes
    let rerun = apcast()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(tmp.path().join("out2"))
        .output()
        .unwrap();
    assert!(rerun.status.success());
    assert_eq!(
        fs::read(tmp.path().join("out/evaluate/traffic/summary.csv")).unwrap(),
        fs::read(tmp.path().join("out2/evaluate/traffic/summary.csv")).unwrap(),
    );
    let stdout = String::from_utf8_lossy(&rerun.stdout);
    assert!(stdout.contains("AP001,traffic"), "stdout: {stdout}");
}

#[test]
fn predict_reads_model_and_window() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());
    for verb in ["synth", "run"] {
        let status = apcast().args([verb, "--config"]).arg(&config).status().unwrap();
        assert!(status.success());
    }
    let window = tmp.path().join("window.csv");
    let mut body = String::from("AP001,AP002,AP003\n");
    for k in 0..10 {
        body.push_str(&format!("{},{},{}\n", 400 + k, 380 + k, 420 + k));
    }
    fs::write(&window, body).unwrap();
    let output = apcast()
        .args(["predict", "--model"])
        .arg(tmp.path().join("out/train/traffic/models/AP001__lstm.model"))
        .arg("--window")
        .arg(&window)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("AP001: predicted"), "stdout: {stdout}");
}

#[test]
fn missing_artifacts_exit_nonzero_with_stage_tag() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());
    // train before anything exists
    let output = apcast()
        .args(["train", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("missing artifact"), "stderr: {stderr}");
}

#[test]
fn bad_config_exits_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.toml");
    fs::write(&config, "treshold = 0.5\n").unwrap();
    let output = apcast()
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("error"));
}
