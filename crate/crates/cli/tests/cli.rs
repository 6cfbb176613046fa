//! End-to-end tests of the `multigait` binary: exit codes, file
//! outputs, and rerun determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multigait"))
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        r#"{
            "dataset": { "trial_duration": 5.0, "durations_t": [1.5], "stride": 6 },
            "gpr_train": { "epochs": 1 },
            "tc_train": { "epochs": 1 },
            "seeds": [1]
        }"#,
    )
    .unwrap();
    path
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn synth_writes_grid_and_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let out_c = dir.path().join("c");

    for (out, seed) in [(&out_a, "7"), (&out_b, "7"), (&out_c, "8")] {
        let output = run(bin()
            .args(["synth", "--config"])
            .arg(&cfg)
            .args(["--seed", seed, "--out"])
            .arg(out));
        assert_code(&output, 0);
    }
    let imu_count = std::fs::read_dir(&out_a)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with("_imu.csv"))
        .count();
    assert_eq!(imu_count, 12, "default grid is 3 terrains x 4 cadences");
    assert!(out_a.join("manifest.json").exists());

    let a = std::fs::read(out_a.join("manifest.json")).unwrap();
    let b = std::fs::read(out_b.join("manifest.json")).unwrap();
    let c = std::fs::read(out_c.join("manifest.json")).unwrap();
    assert_eq!(a, b, "same seed, same manifest bytes");
    assert_ne!(a, c, "different seed, different manifest");
}

#[test]
fn two_stage_training_and_inference_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let gpr_out = dir.path().join("gpr");
    let tc_out = dir.path().join("tc");

    let output = run(bin()
        .args(["train-gpr", "--config"])
        .arg(&cfg)
        .args(["--seed", "1", "--out"])
        .arg(&gpr_out));
    assert_code(&output, 0);
    let weights = gpr_out.join("gpr.weights");
    assert!(weights.exists());
    assert!(gpr_out.join("gpr_loss.csv").exists());
    assert!(gpr_out.join("effective_config.json").exists());
    assert!(gpr_out.join("model_spec.json").exists());
    let loss_csv = std::fs::read_to_string(gpr_out.join("gpr_loss.csv")).unwrap();
    assert!(loss_csv.starts_with("epoch,train_loss,test_loss\n"));

    // Rerun with the identical config reproduces the weight file byte
    // for byte.
    let gpr_out2 = dir.path().join("gpr2");
    let output = run(bin()
        .args(["train-gpr", "--config"])
        .arg(&cfg)
        .args(["--seed", "1", "--out"])
        .arg(&gpr_out2));
    assert_code(&output, 0);
    assert_eq!(
        std::fs::read(&weights).unwrap(),
        std::fs::read(gpr_out2.join("gpr.weights")).unwrap()
    );

    let output = run(bin()
        .args(["train-tc", "--config"])
        .arg(&cfg)
        .args(["--seed", "1", "--gpr-weights"])
        .arg(&weights)
        .arg("--out")
        .arg(&tc_out));
    assert_code(&output, 0);
    let multitask = tc_out.join("multitask.weights");
    assert!(multitask.exists());
    assert!(tc_out.join("tc_loss.csv").exists());

    // Inference over a synthesized trial.
    let synth_out = dir.path().join("trials");
    let output = run(bin()
        .args(["synth", "--config"])
        .arg(&cfg)
        .args(["--seed", "1", "--out"])
        .arg(&synth_out));
    assert_code(&output, 0);
    let trial_csv = std::fs::read_dir(&synth_out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with("_imu.csv"))
        .unwrap();

    let infer_out = dir.path().join("infer");
    let output = run(bin()
        .args(["infer", "--config"])
        .arg(&cfg)
        .arg("--weights")
        .arg(&multitask)
        .arg("--trial")
        .arg(&trial_csv)
        .arg("--out")
        .arg(&infer_out));
    assert_code(&output, 0);

    let predictions = std::fs::read_to_string(infer_out.join("predictions.csv")).unwrap();
    let lines: Vec<&str> = predictions.lines().collect();
    assert_eq!(lines[0], "t,percent,x,y,terrain,p_lw,p_sa,p_sd");
    // Window arithmetic: 250 samples, length 75, stride 6.
    assert_eq!(lines.len() - 1, (250 - 75) / 6 + 1);
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 8);
        assert!(["LW", "SA", "SD"].contains(&cols[4]), "terrain column: {line}");
        // Emitted percent is the angle of the emitted (x, y).
        let percent: f64 = cols[1].parse().unwrap();
        let x: f64 = cols[2].parse().unwrap();
        let y: f64 = cols[3].parse().unwrap();
        let expect = multigait_core::from_phase_xy(x, y).unwrap();
        assert!((percent - expect).abs() < 1e-9);
        let probs: Vec<f64> = cols[5..8].iter().map(|c| c.parse().unwrap()).collect();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn train_tc_without_weights_flag_is_a_usage_error() {
    let output = run(bin().arg("train-tc"));
    assert_code(&output, 1);
}

#[test]
fn gradcheck_passes_and_detects_injected_fault() {
    let output = run(bin().arg("gradcheck"));
    assert_code(&output, 0);
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("PASS"), "{text}");

    let output = run(bin().args(["gradcheck", "--inject-fault", "backbone.b1.conv.w"]));
    assert_code(&output, 3);
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("FAIL"), "{text}");
}

#[test]
fn label_command_produces_phase_labels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let synth_out = dir.path().join("trials");
    let output = run(bin()
        .args(["synth", "--config"])
        .arg(&cfg)
        .args(["--seed", "3", "--out"])
        .arg(&synth_out));
    assert_code(&output, 0);
    let fsr_csv = std::fs::read_dir(&synth_out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with("_fsr.csv"))
        .unwrap();

    let label_out = dir.path().join("labels");
    let output = run(bin().arg("label").arg("--fsr").arg(&fsr_csv).arg("--out").arg(&label_out));
    assert_code(&output, 0);
    let text = std::fs::read_to_string(label_out.join("labels.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,percent,x,y");
    assert!(lines.len() > 50);
    for line in &lines[1..] {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((0.0..100.0).contains(&cols[1]));
        assert!((cols[2] * cols[2] + cols[3] * cols[3] - 1.0).abs() < 1e-9);
    }
}

#[test]
fn compare_runs_and_partial_failure_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("cmp");
    let output = run(bin()
        .args(["compare", "--config"])
        .arg(&cfg)
        .args(["--seeds", "1,2", "--out"])
        .arg(&out));
    assert_code(&output, 0);
    assert!(out.join("comparison.json").exists());
    assert!(out.join("comparison.txt").exists());
    assert!(out.join("gpr_seed1_loss.csv").exists());
    assert!(out.join("model3_seed2_loss.csv").exists());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("model1-pretrained"));

    // A dataset without 5 complete cycles per terrain cannot satisfy
    // the split; the run must abort with a diagnostic and exit 2.
    let bad_cfg = dir.path().join("bad.json");
    std::fs::write(
        &bad_cfg,
        r#"{
            "dataset": { "trial_duration": 3.0, "cadences_bpm": [70.0],
                         "durations_t": [1.5], "stride": 6 },
            "gpr_train": { "epochs": 1 },
            "tc_train": { "epochs": 1 }
        }"#,
    )
    .unwrap();
    let output = run(bin()
        .args(["compare", "--config"])
        .arg(&bad_cfg)
        .args(["--seeds", "1", "--out"])
        .arg(dir.path().join("cmp_bad")));
    assert_code(&output, 2);
    assert!(String::from_utf8_lossy(&output.stderr).contains("invalid split"));
}

#[test]
fn unknown_config_key_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"not_a_key": true}"#).unwrap();
    let output = run(bin().args(["synth", "--config"]).arg(&path));
    assert_code(&output, 2);
}

#[test]
fn help_lists_every_subcommand_and_flags() {
    let output = run(bin().arg("--help"));
    assert_code(&output, 0);
    let text = String::from_utf8_lossy(&output.stdout);
    for sub in ["synth", "train-gpr", "train-tc", "compare", "infer", "gradcheck", "label"] {
        assert!(text.contains(sub), "missing {sub} in help");
    }
    for (sub, flags) in [
        ("synth", vec!["--config", "--seed", "--out"]),
        ("train-gpr", vec!["--config", "--seed", "--out", "--faithful-relu"]),
        ("train-tc", vec!["--gpr-weights"]),
        ("compare", vec!["--seeds"]),
        ("infer", vec!["--weights", "--trial"]),
        ("label", vec!["--fsr"]),
    ] {
        let output = run(bin().args([sub, "--help"]));
        assert_code(&output, 0);
        let text = String::from_utf8_lossy(&output.stdout);
        for flag in flags {
            assert!(text.contains(flag), "{sub} --help missing {flag}");
        }
    }
}
