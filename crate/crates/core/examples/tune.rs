// Tuning sweep: how noise level and window stride shape the
// three-model terrain comparison and the gait-phase error.

use std::time::Instant;

use multigait_core::compare::{run_comparison, ComparisonConfig};
use multigait_core::synthgait::{generate_dataset, DatasetConfig, GeneratorParams};

fn main() {
    let noise_levels: Vec<f64> = std::env::var("NOISE")
        .map(|s| s.split(',').map(|v| v.parse().unwrap()).collect())
        .unwrap_or_else(|_| vec![0.05, 0.15, 0.25]);
    let strides: Vec<usize> = std::env::var("STRIDE")
        .map(|s| s.split(',').map(|v| v.parse().unwrap()).collect())
        .unwrap_or_else(|_| vec![2, 4]);
    let seeds: Vec<u64> = std::env::var("SEEDS")
        .map(|s| s.split(',').map(|v| v.parse().unwrap()).collect())
        .unwrap_or_else(|_| vec![1, 2]);

    for &noise in &noise_levels {
        for &stride in &strides {
            let t0 = Instant::now();
            let ds_cfg = DatasetConfig { stride, seed: 0, ..DatasetConfig::default() };
            let params = GeneratorParams { noise_std: noise, ..GeneratorParams::default() };
            let dataset = generate_dataset(&ds_cfg, &params).unwrap();
            let cfg = ComparisonConfig { seeds: seeds.clone(), ..ComparisonConfig::default() };
            let (report, _) = run_comparison(&dataset, &cfg).unwrap();
            let accs: Vec<f64> = report.models.iter().map(|m| m.accuracy_percent.mean).collect();
            println!(
                "noise {noise:.2} stride {stride}: windows {} gpr {} | rmse {:.2}±{:.2} | m1 {:.2} m2 {:.2} m3 {:.2} | gap13 {:+.2} | {:.0}s",
                dataset.windows.len(),
                dataset.gpr_indices().len(),
                report.gpr_rmse_percent.mean,
                report.gpr_rmse_percent.std,
                accs[0],
                accs[1],
                accs[2],
                accs[0] - accs[2],
                t0.elapsed().as_secs_f64()
            );
        }
    }
}
