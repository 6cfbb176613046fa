//! Run configuration: a single JSON document whose defaults are the
//! paper protocol. Unknown keys are rejected; command-line flags
//! override file values; the effective (merged) config is echoed into
//! every output directory.

use std::path::Path;

use serde::{Deserialize, Serialize};

use multigait_core::compare::{ComparisonConfig, ModelSettings};
use multigait_core::synthgait::{DatasetConfig, GeneratorParams};
use multigait_core::trainer::TrainConfig;
use multigait_core::{Error, Result, Task};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Default for TrainSettings {
    fn default() -> Self {
        gpr_train_default()
    }
}

fn gpr_train_default() -> TrainSettings {
    TrainSettings { lr: 1e-4, batch_size: 128, epochs: 20 }
}

fn tc_train_default() -> TrainSettings {
    TrainSettings { lr: 1e-4, batch_size: 128, epochs: 10 }
}

fn seeds_default() -> Vec<u64> {
    vec![1, 2, 3, 4, 5]
}

fn curve_cap_default() -> usize {
    1024
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub generator: GeneratorParams,
    #[serde(default = "gpr_train_default")]
    pub gpr_train: TrainSettings,
    #[serde(default = "tc_train_default")]
    pub tc_train: TrainSettings,
    pub model: ModelSettings,
    #[serde(default = "seeds_default")]
    pub seeds: Vec<u64>,
    #[serde(default = "curve_cap_default")]
    pub curve_eval_cap: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetConfig::default(),
            generator: GeneratorParams::default(),
            gpr_train: gpr_train_default(),
            tc_train: tc_train_default(),
            model: ModelSettings::default(),
            seeds: seeds_default(),
            curve_eval_cap: curve_cap_default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn gpr_train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            task: Task::Gpr,
            lr: self.gpr_train.lr,
            batch_size: self.gpr_train.batch_size,
            epochs: self.gpr_train.epochs,
            seed,
        }
    }

    pub fn tc_train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            task: Task::Tc,
            lr: self.tc_train.lr,
            batch_size: self.tc_train.batch_size,
            epochs: self.tc_train.epochs,
            seed,
        }
    }

    pub fn comparison_config(&self) -> ComparisonConfig {
        ComparisonConfig {
            seeds: self.seeds.clone(),
            gpr_train: self.gpr_train_config(0),
            tc_train: self.tc_train_config(0),
            model: self.model.clone(),
            curve_eval_cap: self.curve_eval_cap,
        }
    }

    /// Writes the merged config next to a command's outputs.
    pub fn echo_into(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self).expect("config serializes");
        std::fs::write(dir.join("effective_config.json"), json)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_paper_protocol() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.gpr_train.lr, 1e-4);
        assert_eq!(cfg.gpr_train.batch_size, 128);
        assert_eq!(cfg.gpr_train.epochs, 20);
        assert_eq!(cfg.tc_train.epochs, 10);
        assert_eq!(cfg.seeds, vec![1, 2, 3, 4, 5]);
        assert_eq!(cfg.dataset.cadences_bpm, vec![70.0, 90.0, 110.0, 130.0]);
        assert_eq!(cfg.dataset.durations_t, vec![1.5, 1.6, 1.7]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<RunConfig>(r#"{"gpr_train": {"lr": 0.1, "bogus": 1}}"#);
        assert!(err.is_err());
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"gpr_train": {"epochs": 3}, "seeds": [9]}"#).unwrap();
        assert_eq!(cfg.gpr_train.epochs, 3);
        assert_eq!(cfg.gpr_train.lr, 1e-4);
        assert_eq!(cfg.seeds, vec![9]);
        assert_eq!(cfg.tc_train.epochs, 10);
    }
}
