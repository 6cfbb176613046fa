//! Subcommand implementations.

use std::path::{Path, PathBuf};

use multigait_core::compare::{emit_report, run_comparison};
use multigait_core::model::{ArchSpec, GaitModel};
use multigait_core::synthgait::{
    generate_dataset, generate_trial, subseed, Dataset, Terrain, TrialCondition,
};
use multigait_core::trainer::{
    evaluate_gpr, split_gpr, split_tc, train, train_tc_stage, write_loss_csv,
};
use multigait_core::{io, pipeline, weights, Error, Result};

use crate::config::RunConfig;

// Seed-stream tags shared with the library's comparison runner.
const TAG_GPR_SPLIT: u64 = 1;
const TAG_GPR_INIT: u64 = 2;
const TAG_GPR_TRAIN: u64 = 3;
const TAG_TC_SPLIT: u64 = 4;
const TAG_M1_INIT: u64 = 5;
const TAG_M1_TRAIN: u64 = 6;

fn build_dataset(cfg: &RunConfig, seed: u64) -> Result<Dataset> {
    let mut ds_cfg = cfg.dataset.clone();
    ds_cfg.seed = seed;
    generate_dataset(&ds_cfg, &cfg.generator)
}

/// `synth`: write the condition-grid trials as CSV pairs plus a JSON
/// manifest.
pub fn cmd_synth(cfg: &RunConfig, seed: u64, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    cfg.echo_into(out)?;
    let mut manifest = Vec::new();
    let mut trial_index = 0u64;
    for &terrain in &cfg.dataset.terrains {
        for &cadence in &cfg.dataset.cadences_bpm {
            let cond = TrialCondition {
                terrain,
                cadence_bpm: cadence,
                duration: cfg.dataset.trial_duration,
                seed: subseed(seed, trial_index),
            };
            let trial = generate_trial(&cond, &cfg.generator);
            let stem = format!("trial_{:02}_{}_{}bpm", trial_index, terrain.tag(), cadence as u64);
            let imu_path = out.join(format!("{stem}_imu.csv"));
            let fsr_path = out.join(format!("{stem}_fsr.csv"));
            io::write_imu_csv(&trial.imu, &imu_path)?;
            io::write_fsr_csv(&trial.fsr, &fsr_path)?;
            manifest.push(serde_json::json!({
                "condition": cond,
                "imu_csv": imu_path.file_name().unwrap().to_str(),
                "fsr_csv": fsr_path.file_name().unwrap().to_str(),
                "flp_times": trial.truth.flp_times,
                "fsp_times": trial.truth.fsp_times,
            }));
            trial_index += 1;
        }
    }
    let doc = serde_json::json!({ "seed": seed, "trials": manifest });
    std::fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&doc).unwrap())?;
    println!("wrote {trial_index} trials to {}", out.display());
    Ok(())
}

/// `train-gpr`: stage one of the protocol on a synthetic dataset.
pub fn cmd_train_gpr(cfg: &RunConfig, seed: u64, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    cfg.echo_into(out)?;
    let dataset = build_dataset(cfg, cfg.dataset.seed)?;
    let split = split_gpr(&dataset, subseed(seed, TAG_GPR_SPLIT));
    let mut model = GaitModel::build_gpr(
        &cfg.model.gpr_hidden,
        cfg.model.gpr_output(),
        subseed(seed, TAG_GPR_INIT),
    );
    let train_cfg = cfg.gpr_train_config(subseed(seed, TAG_GPR_TRAIN));
    let history = train(
        &mut model,
        &dataset,
        &split.train,
        Some(&split.test),
        &train_cfg,
        cfg.curve_eval_cap,
    )?;
    let rmse = evaluate_gpr(&model, &dataset, &split.test)?;

    let weights_path = out.join("gpr.weights");
    weights::save_weights(&model, &weights_path)?;
    write_loss_csv(&history, &out.join("gpr_loss.csv"))?;
    std::fs::write(out.join("model_spec.json"), model.arch.to_json())?;
    println!(
        "trained gait-phase model: held-out circular RMSE {rmse:.3}% ({} train / {} test windows)",
        split.train.len(),
        split.test.len()
    );
    println!("weights: {}", weights_path.display());
    Ok(())
}

/// `train-tc`: stage two — attach and train the terrain head on a
/// frozen backbone loaded from stage one.
pub fn cmd_train_tc(cfg: &RunConfig, seed: u64, gpr_weights: &Path, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    cfg.echo_into(out)?;
    let expected = ArchSpec::gpr(&cfg.model.gpr_hidden, cfg.model.gpr_output());
    let mut model = weights::load_weights_expecting(gpr_weights, &expected)?;

    let dataset = build_dataset(cfg, cfg.dataset.seed)?;
    let split = split_tc(&dataset, subseed(seed, TAG_TC_SPLIT))?;
    let train_cfg = cfg.tc_train_config(subseed(seed, TAG_M1_TRAIN));
    let history = train_tc_stage(
        &mut model,
        &cfg.model.tc_hidden,
        &dataset,
        &split,
        &train_cfg,
        subseed(seed, TAG_M1_INIT),
        cfg.curve_eval_cap,
    )?;
    let (acc, xent) = multigait_core::trainer::evaluate_tc(&model, &dataset, &split.test)?;

    let weights_path = out.join("multitask.weights");
    weights::save_weights(&model, &weights_path)?;
    write_loss_csv(&history, &out.join("tc_loss.csv"))?;
    std::fs::write(out.join("model_spec.json"), model.arch.to_json())?;
    println!("terrain head trained on 15 cycles: accuracy {acc:.2}%, cross-entropy {xent:.5}");
    println!("weights: {}", weights_path.display());
    Ok(())
}

/// `compare`: the full three-model comparison over all seeds.
pub fn cmd_compare(cfg: &RunConfig, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    cfg.echo_into(out)?;
    let dataset = build_dataset(cfg, cfg.dataset.seed)?;
    let (report, _) = run_comparison(&dataset, &cfg.comparison_config())?;
    emit_report(&report, out)?;
    for s in &report.per_seed {
        write_loss_csv(&s.gpr_curve, &out.join(format!("gpr_seed{}_loss.csv", s.seed)))?;
        for (m, result) in s.models.iter().enumerate() {
            write_loss_csv(
                &result.curve,
                &out.join(format!("model{}_seed{}_loss.csv", m + 1, s.seed)),
            )?;
        }
    }
    print!("{}", report.to_text());
    println!("report: {}", out.join("comparison.json").display());
    Ok(())
}

/// `infer`: per-window predictions for a trial CSV using multitask
/// weights.
pub fn cmd_infer(cfg: &RunConfig, weights_path: &Path, trial_csv: &Path, out: &Path) -> Result<()> {
    let model = weights::load_weights(weights_path)?;
    if model.gpr_head.is_none() || model.tc_head.is_none() {
        return Err(Error::IncompatibleWeights(
            "inference needs a multitask weight file with both heads".into(),
        ));
    }
    let samples = io::read_imu_csv(trial_csv)?;
    let channels = pipeline::select_features(&samples)?;
    let wcfg = cfg.dataset.window_config(cfg.dataset.durations_t[0], cfg.generator.sample_rate);
    let windows = pipeline::stack_windows(&channels, &wcfg)?;

    std::fs::create_dir_all(out)?;
    cfg.echo_into(out)?;
    let mut rows = String::from("t,percent,x,y,terrain,p_lw,p_sa,p_sd\n");
    for chunk in windows.chunks(256) {
        let inputs: Vec<pipeline::InputTensor> =
            chunk.iter().map(|w| pipeline::make_input(w, &wcfg)).collect::<Result<_>>()?;
        let refs: Vec<&pipeline::InputTensor> = inputs.iter().collect();
        let batch = GaitModel::batch_from_inputs(&refs);
        let gpr = model.forward_gpr(&batch)?;
        let tc = model.forward_tc(&batch)?;
        for (row, w) in chunk.iter().enumerate() {
            let t = samples[w.start + w.len() - 1].t;
            let (x, y) = (gpr.row(row)[0], gpr.row(row)[1]);
            let percent = multigait_core::from_phase_xy(x, y)?;
            let probs = tc.row(row);
            let mut best = 0;
            for k in 1..3 {
                if probs[k] > probs[best] {
                    best = k;
                }
            }
            let terrain = Terrain::from_class_index(best)?;
            rows.push_str(&format!(
                "{t},{percent},{x},{y},{},{},{},{}\n",
                terrain.tag(),
                probs[0],
                probs[1],
                probs[2]
            ));
        }
    }
    let path = out.join("predictions.csv");
    std::fs::write(&path, rows)?;
    println!("wrote {} windows to {}", windows.len(), path.display());
    Ok(())
}

/// `label`: FSR stream to gait-percent labels.
pub fn cmd_label(cfg: &RunConfig, fsr_csv: &Path, out: &Path) -> Result<()> {
    let fsr = io::read_fsr_csv(fsr_csv)?;
    let sections = multigait_core::contact_sections(&fsr, cfg.dataset.fsr_threshold)?;
    let events = multigait_core::detect_events(&sections)?;
    let times: Vec<f64> = fsr.iter().map(|s| s.t).collect();
    let percents = multigait_core::assign_percent(&times, &events)?;
    std::fs::create_dir_all(out)?;
    let path = out.join("labels.csv");
    io::write_labels_csv(&times, &percents, &path)?;
    let labeled = percents.iter().filter(|p| p.is_some()).count();
    println!("labeled {labeled} of {} samples -> {}", times.len(), path.display());
    Ok(())
}

/// `gradcheck`: every backward pass against central differences on the
/// reduced two-block network.
pub fn cmd_gradcheck(inject_fault: Option<&str>) -> Result<()> {
    let (mut model, x, targets) = multigait_core::model::gradcheck_fixture(97);
    let report = multigait_core::grad_check_with_fault(&mut model, &x, &targets, 1e-5, inject_fault)?;
    let pass = report.passed(1e-6);
    println!(
        "gradient check: {} parameters, {} elements, max relative error {:.3e} (worst: {}) -> {}",
        report.params_checked,
        report.elements_checked,
        report.max_rel_err,
        report.worst_param,
        if pass { "PASS" } else { "FAIL" }
    );
    if pass {
        Ok(())
    } else {
        Err(Error::NumericalError(format!(
            "gradient check failed with max relative error {:.3e}",
            report.max_rel_err
        )))
    }
}

/// Resolves the output directory, defaulting to `./out`.
pub fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.unwrap_or_else(|| PathBuf::from("out"))
}
