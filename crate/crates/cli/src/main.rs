//! `multigait`: batch reproduction of the two-stage multitask training
//! protocol on synthetic gait data, plus offline labeling and
//! inference.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
//! error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use multigait_core::Error;

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "multigait",
    about = "Multitask gait-phase + terrain recognition on synthetic IMU gait data",
    version
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// JSON run configuration; omitted fields keep the paper defaults
    /// (Adam, lr 1e-4, batch 128, 20/10 epochs, T in {1.5, 1.6, 1.7}).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Base seed for dataset generation, splits, and initialization
    /// [default: 0]
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Output directory [default: out]
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Use ReLU on the gait-phase output layer (the stated head) instead
    /// of the default linear output.
    #[arg(long, global = true)]
    faithful_relu: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic condition grid (3 terrains x 4 cadences
    /// by default) as per-trial IMU/FSR CSV pairs plus a manifest.
    Synth,
    /// Stage 1: train the gait-phase model on a 9:1 window split
    /// (MSE loss, 20 epochs by default) and save its weights.
    TrainGpr,
    /// Stage 2: load stage-1 weights, freeze the backbone, train the
    /// terrain head on 5 step cycles per terrain (cross-entropy,
    /// 10 epochs by default).
    TrainTc {
        /// Weights produced by train-gpr.
        #[arg(long, value_name = "PATH")]
        gpr_weights: PathBuf,
    },
    /// Run the three-model data-efficiency comparison over all seeds
    /// and write comparison.json / comparison.txt plus loss curves.
    Compare {
        /// Comma-separated seed list [default: 1,2,3,4,5]
        #[arg(long, value_name = "S1,S2,...", value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Per-window gait-phase and terrain predictions for a trial CSV
    /// (t,lax,lay,laz,avx,avy,avz).
    Infer {
        /// Multitask weights (train-tc output).
        #[arg(long, value_name = "PATH")]
        weights: PathBuf,
        /// Trial IMU CSV.
        #[arg(long, value_name = "PATH")]
        trial: PathBuf,
    },
    /// Check every backward pass against central finite differences on
    /// a reduced network; exits nonzero above 1e-6 relative error.
    Gradcheck {
        /// Flip the analytic gradient sign of one named parameter (test
        /// hook; must make the check fail).
        #[arg(long, value_name = "PARAM", hide = true)]
        inject_fault: Option<String>,
    },
    /// Convert an FSR CSV (t,front,back) into gait-percent labels
    /// (t,percent,x,y).
    Label {
        /// FSR CSV path.
        #[arg(long, value_name = "PATH")]
        fsr: PathBuf,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NumericalError(_) => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.global.faithful_relu {
        cfg.model.faithful_relu = true;
    }
    let seed = cli.global.seed.unwrap_or(0);
    if cli.global.seed.is_some() {
        cfg.dataset.seed = seed;
    }
    let out = commands::out_dir(cli.global.out.clone());

    match cli.command {
        Command::Synth => commands::cmd_synth(&cfg, seed, &out),
        Command::TrainGpr => commands::cmd_train_gpr(&cfg, seed, &out),
        Command::TrainTc { gpr_weights } => commands::cmd_train_tc(&cfg, seed, &gpr_weights, &out),
        Command::Compare { seeds } => {
            if let Some(seeds) = seeds {
                if seeds.is_empty() {
                    return Err(Error::InvalidConfig("seed list must not be empty".into()));
                }
                cfg.seeds = seeds;
            }
            commands::cmd_compare(&cfg, &out)
        }
        Command::Infer { weights, trial } => commands::cmd_infer(&cfg, &weights, &trial, &out),
        Command::Gradcheck { inject_fault } => commands::cmd_gradcheck(inject_fault.as_deref()),
        Command::Label { fsr } => commands::cmd_label(&cfg, &fsr, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
