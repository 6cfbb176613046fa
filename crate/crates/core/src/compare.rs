//! The three-model data-efficiency comparison.
//!
//! For every seed: split, train a gait-phase model on the 9:1 split,
//! then train three terrain classifiers on the identical 15-cycle
//! split — Model 1 re-uses the frozen pretrained blocks, Model 2 has
//! the same structure but starts from scratch fully trainable, and
//! Model 3 is an MLP on the flattened input. The report carries
//! per-seed metrics, mean ± std aggregates, loss curves, and the full
//! provenance needed to reproduce it byte for byte.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{ArchSpec, GaitModel, OutputActivation};
use crate::synthgait::{subseed, Dataset, DatasetManifest};
use crate::trainer::{
    evaluate_gpr, evaluate_tc, split_gpr, split_tc, train, train_tc_stage, LossHistory, TrainConfig,
};

pub const MODEL_NAMES: [&str; 3] = ["model1-pretrained", "model2-scratch", "model3-mlp"];

// Seed-stream tags, one per independent random choice.
const TAG_GPR_SPLIT: u64 = 1;
const TAG_GPR_INIT: u64 = 2;
const TAG_GPR_TRAIN: u64 = 3;
const TAG_TC_SPLIT: u64 = 4;
const TAG_M1_INIT: u64 = 5;
const TAG_M1_TRAIN: u64 = 6;
const TAG_M2_INIT: u64 = 7;
const TAG_M2_TRAIN: u64 = 8;
const TAG_M3_INIT: u64 = 9;
const TAG_M3_TRAIN: u64 = 10;

/// Head widths and the gait-phase output activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSettings {
    pub gpr_hidden: Vec<usize>,
    pub tc_hidden: Vec<usize>,
    /// Use ReLU on the gait-phase output (the stated head) instead of
    /// the default linear output.
    pub faithful_relu: bool,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            gpr_hidden: crate::model::GPR_HIDDEN_DEFAULT.to_vec(),
            tc_hidden: crate::model::TC_HIDDEN_DEFAULT.to_vec(),
            faithful_relu: false,
        }
    }
}

impl ModelSettings {
    pub fn gpr_output(&self) -> OutputActivation {
        if self.faithful_relu {
            OutputActivation::Relu
        } else {
            OutputActivation::Identity
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConfig {
    pub seeds: Vec<u64>,
    pub gpr_train: TrainConfig,
    pub tc_train: TrainConfig,
    pub model: ModelSettings,
    /// Per-epoch test-loss curves evaluate on at most this many
    /// held-out windows (final metrics always use the full test set).
    pub curve_eval_cap: usize,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            seeds: vec![1, 2, 3, 4, 5],
            gpr_train: TrainConfig::gpr(0),
            tc_train: TrainConfig::tc(0),
            model: ModelSettings::default(),
            curve_eval_cap: 1024,
        }
    }
}

impl ComparisonConfig {
    /// Human-readable list of fields that differ from the paper-default
    /// protocol.
    pub fn overrides(&self) -> Vec<String> {
        let mut out = Vec::new();
        let d = Self::default();
        if self.seeds != d.seeds {
            out.push(format!("seeds: {:?}", self.seeds));
        }
        for (name, got, want) in [
            ("gpr", &self.gpr_train, &d.gpr_train),
            ("tc", &self.tc_train, &d.tc_train),
        ] {
            if got.lr != want.lr {
                out.push(format!("{name}.lr: {}", got.lr));
            }
            if got.batch_size != want.batch_size {
                out.push(format!("{name}.batch_size: {}", got.batch_size));
            }
            if got.epochs != want.epochs {
                out.push(format!("{name}.epochs: {}", got.epochs));
            }
        }
        if self.model != d.model {
            out.push(format!(
                "model: gpr_hidden {:?}, tc_hidden {:?}, faithful_relu {}",
                self.model.gpr_hidden, self.model.tc_hidden, self.model.faithful_relu
            ));
        }
        if self.curve_eval_cap != d.curve_eval_cap {
            out.push(format!("curve_eval_cap: {}", self.curve_eval_cap));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation over seeds.
    pub std: f64,
}

fn summarize(values: &[f64]) -> MetricSummary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MetricSummary { mean, std }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSeedResult {
    pub accuracy_percent: f64,
    pub cross_entropy: f64,
    pub curve: LossHistory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub gpr_rmse_percent: f64,
    pub gpr_curve: LossHistory,
    /// Indexed like [`MODEL_NAMES`].
    pub models: Vec<ModelSeedResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    pub accuracy_percent: MetricSummary,
    pub cross_entropy: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: ComparisonConfig,
    pub overrides: Vec<String>,
    pub dataset: DatasetManifest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub provenance: Provenance,
    pub gpr_rmse_percent: MetricSummary,
    pub models: Vec<ModelSummary>,
    pub per_seed: Vec<SeedResult>,
}

/// Trained models kept alongside the report (weight files, frozen-
/// backbone checks).
pub struct SeedArtifacts {
    pub seed: u64,
    /// Gait-phase model as trained, before the terrain stage.
    pub gpr_model: GaitModel,
    /// Model 1 after the terrain stage: both heads, frozen backbone.
    pub multitask_model: GaitModel,
    pub gpr_test: Vec<usize>,
}

pub fn run_comparison(dataset: &Dataset, cfg: &ComparisonConfig) -> Result<(ComparisonReport, Vec<SeedArtifacts>)> {
    let mut per_seed = Vec::new();
    let mut artifacts = Vec::new();

    for &seed in &cfg.seeds {
        // Stage 1: gait-phase model on the 9:1 window split.
        let gpr_split = split_gpr(dataset, subseed(seed, TAG_GPR_SPLIT));
        let mut gpr_model = GaitModel::build_gpr(
            &cfg.model.gpr_hidden,
            cfg.model.gpr_output(),
            subseed(seed, TAG_GPR_INIT),
        );
        let gpr_cfg = TrainConfig {
            task: crate::model::Task::Gpr,
            seed: subseed(seed, TAG_GPR_TRAIN),
            ..cfg.gpr_train
        };
        let gpr_curve = train(
            &mut gpr_model,
            dataset,
            &gpr_split.train,
            Some(&gpr_split.test),
            &gpr_cfg,
            cfg.curve_eval_cap,
        )?;
        let gpr_rmse = evaluate_gpr(&gpr_model, dataset, &gpr_split.test)?;

        // Stage 2: the identical 15-cycle terrain split for all three
        // models.
        let tc_split = split_tc(dataset, subseed(seed, TAG_TC_SPLIT))?;
        let tc_cfg = |tag: u64| TrainConfig {
            task: crate::model::Task::Tc,
            seed: subseed(seed, tag),
            ..cfg.tc_train
        };

        let mut m1 = gpr_model.clone();
        let m1_curve = train_tc_stage(
            &mut m1,
            &cfg.model.tc_hidden,
            dataset,
            &tc_split,
            &tc_cfg(TAG_M1_TRAIN),
            subseed(seed, TAG_M1_INIT),
            cfg.curve_eval_cap,
        )?;
        let (m1_acc, m1_xent) = evaluate_tc(&m1, dataset, &tc_split.test)?;

        let mut m2 = GaitModel::from_arch(
            &ArchSpec::tc_scratch(&cfg.model.tc_hidden),
            subseed(seed, TAG_M2_INIT),
        );
        let m2_curve = train(
            &mut m2,
            dataset,
            &tc_split.train,
            Some(&tc_split.test),
            &tc_cfg(TAG_M2_TRAIN),
            cfg.curve_eval_cap,
        )?;
        let (m2_acc, m2_xent) = evaluate_tc(&m2, dataset, &tc_split.test)?;

        let mut m3 = GaitModel::from_arch(
            &ArchSpec::tc_mlp(&cfg.model.tc_hidden),
            subseed(seed, TAG_M3_INIT),
        );
        let m3_curve = train(
            &mut m3,
            dataset,
            &tc_split.train,
            Some(&tc_split.test),
            &tc_cfg(TAG_M3_TRAIN),
            cfg.curve_eval_cap,
        )?;
        let (m3_acc, m3_xent) = evaluate_tc(&m3, dataset, &tc_split.test)?;

        per_seed.push(SeedResult {
            seed,
            gpr_rmse_percent: gpr_rmse,
            gpr_curve,
            models: vec![
                ModelSeedResult { accuracy_percent: m1_acc, cross_entropy: m1_xent, curve: m1_curve },
                ModelSeedResult { accuracy_percent: m2_acc, cross_entropy: m2_xent, curve: m2_curve },
                ModelSeedResult { accuracy_percent: m3_acc, cross_entropy: m3_xent, curve: m3_curve },
            ],
        });
        artifacts.push(SeedArtifacts {
            seed,
            gpr_model,
            multitask_model: m1,
            gpr_test: gpr_split.test,
        });
    }

    let models = (0..3)
        .map(|m| ModelSummary {
            name: MODEL_NAMES[m].to_string(),
            accuracy_percent: summarize(
                &per_seed.iter().map(|s| s.models[m].accuracy_percent).collect::<Vec<_>>(),
            ),
            cross_entropy: summarize(
                &per_seed.iter().map(|s| s.models[m].cross_entropy).collect::<Vec<_>>(),
            ),
        })
        .collect();

    let report = ComparisonReport {
        provenance: Provenance {
            config: cfg.clone(),
            overrides: cfg.overrides(),
            dataset: dataset.manifest.clone(),
        },
        gpr_rmse_percent: summarize(
            &per_seed.iter().map(|s| s.gpr_rmse_percent).collect::<Vec<_>>(),
        ),
        models,
        per_seed,
    };
    Ok((report, artifacts))
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width summary table, one row per model, plus per-seed
    /// detail. Byte-stable for identical reports.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("================ multitask comparison summary ================\n");
        out.push_str(&format!(
            "seeds: {:?}   (aggregates are mean ± std over seeds)\n\n",
            self.provenance.config.seeds
        ));
        out.push_str(&format!(
            "GPR   circular RMSE %        {:8.3} ± {:.3}\n\n",
            self.gpr_rmse_percent.mean, self.gpr_rmse_percent.std
        ));
        out.push_str("TC    model                  accuracy %           cross-entropy\n");
        for m in &self.models {
            out.push_str(&format!(
                "      {:<22} {:8.3} ± {:<8.3} {:10.5} ± {:.5}\n",
                m.name,
                m.accuracy_percent.mean,
                m.accuracy_percent.std,
                m.cross_entropy.mean,
                m.cross_entropy.std
            ));
        }
        out.push_str("\nper-seed detail\n");
        out.push_str("      seed   gpr rmse %   model               accuracy %   cross-entropy\n");
        for s in &self.per_seed {
            for (m, result) in s.models.iter().enumerate() {
                out.push_str(&format!(
                    "      {:<6} {:10.3}   {:<18} {:10.3}   {:12.5}\n",
                    s.seed, s.gpr_rmse_percent, MODEL_NAMES[m], result.accuracy_percent,
                    result.cross_entropy
                ));
            }
        }
        if !self.provenance.overrides.is_empty() {
            out.push_str("\nprotocol overrides\n");
            for o in &self.provenance.overrides {
                out.push_str(&format!("      {o}\n"));
            }
        }
        out
    }
}

/// Writes `comparison.json` and `comparison.txt` into a directory.
pub fn emit_report(report: &ComparisonReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("comparison.json"), report.to_json())?;
    std::fs::write(dir.join("comparison.txt"), report.to_text())?;
    Ok(())
}
