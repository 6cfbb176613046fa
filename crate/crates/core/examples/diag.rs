// Protocol pilot: dataset sizes, per-epoch timing, and end metrics for
// one seed of the default comparison.

use std::time::Instant;

use multigait_core::compare::ModelSettings;
use multigait_core::model::{GaitModel, Task};
use multigait_core::synthgait::{generate_dataset, subseed, DatasetConfig, GeneratorParams};
use multigait_core::trainer::{
    evaluate_gpr, evaluate_tc, split_gpr, split_tc, train, train_tc_stage, TrainConfig,
};

fn main() {
    let t0 = Instant::now();
    let ds_cfg = DatasetConfig::default();
    let params = GeneratorParams::default();
    let dataset = generate_dataset(&ds_cfg, &params).unwrap();
    println!(
        "dataset: {} windows total, {} gpr-labeled, gen time {:.2}s",
        dataset.windows.len(),
        dataset.gpr_indices().len(),
        t0.elapsed().as_secs_f64()
    );
    for (i, c) in dataset.cycles_by_terrain().iter().enumerate() {
        println!("terrain {i}: {} complete cycles", c.len());
    }

    let seed = 1u64;
    let settings = ModelSettings::default();
    let split = split_gpr(&dataset, subseed(seed, 1));
    println!("gpr split: {} train / {} test", split.train.len(), split.test.len());

    let mut model = GaitModel::build_gpr(&settings.gpr_hidden, settings.gpr_output(), subseed(seed, 2));
    let cfg = TrainConfig { seed: subseed(seed, 3), ..TrainConfig::gpr(0) };

    // Epoch-by-epoch so each epoch's wall time is visible.
    let full_start = Instant::now();
    for epoch in 0..cfg.epochs {
        let e0 = Instant::now();
        let one = TrainConfig { epochs: 1, seed: subseed(cfg.seed, epoch as u64), ..cfg };
        let hist = train(&mut model, &dataset, &split.train, Some(&split.test), &one, 1024).unwrap();
        let rmse = evaluate_gpr(&model, &dataset, &split.test).unwrap();
        println!(
            "epoch {:2}: train {:.5}  test {:.5}  rmse {:6.2}%  ({:.2}s)",
            epoch + 1,
            hist.train[0],
            hist.test[0],
            rmse,
            e0.elapsed().as_secs_f64()
        );
    }
    println!("gpr total {:.1}s", full_start.elapsed().as_secs_f64());

    let tc_split = split_tc(&dataset, subseed(seed, 4)).unwrap();
    println!("tc split: {} train / {} test", tc_split.train.len(), tc_split.test.len());

    let t1 = Instant::now();
    let mut m1 = model.clone();
    let tc_cfg = TrainConfig { seed: subseed(seed, 6), ..TrainConfig::tc(0) };
    train_tc_stage(&mut m1, &settings.tc_hidden, &dataset, &tc_split, &tc_cfg, subseed(seed, 5), 1024).unwrap();
    let (acc1, xent1) = evaluate_tc(&m1, &dataset, &tc_split.test).unwrap();
    println!("model1: acc {acc1:.2}% xent {xent1:.4} ({:.1}s)", t1.elapsed().as_secs_f64());

    let t2 = Instant::now();
    let mut m2 = GaitModel::from_arch(&multigait_core::ArchSpec::tc_scratch(&settings.tc_hidden), subseed(seed, 7));
    let tc_cfg2 = TrainConfig { task: Task::Tc, seed: subseed(seed, 8), ..tc_cfg };
    train(&mut m2, &dataset, &tc_split.train, Some(&tc_split.test), &tc_cfg2, 1024).unwrap();
    let (acc2, xent2) = evaluate_tc(&m2, &dataset, &tc_split.test).unwrap();
    println!("model2: acc {acc2:.2}% xent {xent2:.4} ({:.1}s)", t2.elapsed().as_secs_f64());

    let t3 = Instant::now();
    let mut m3 = GaitModel::from_arch(&multigait_core::ArchSpec::tc_mlp(&settings.tc_hidden), subseed(seed, 9));
    let tc_cfg3 = TrainConfig { task: Task::Tc, seed: subseed(seed, 10), ..tc_cfg };
    train(&mut m3, &dataset, &tc_split.train, Some(&tc_split.test), &tc_cfg3, 1024).unwrap();
    let (acc3, xent3) = evaluate_tc(&m3, &dataset, &tc_split.test).unwrap();
    println!("model3: acc {acc3:.2}% xent {xent3:.4} ({:.1}s)", t3.elapsed().as_secs_f64());

    println!("total {:.1}s", t0.elapsed().as_secs_f64());
}
