//! Dumps per-epoch test SROCC for all three loss modes on one seed, as a
//! quick look at the training dynamics behind the ablation summaries.
//!
//! Usage: `cargo run --release -p rankcorr --example trace_modes -- [seed]`

use rankcorr::soft_rank::SoftRankConfig;
use rankcorr::train::{gen_synthetic, split_kfold, train, LossMode, TrainConfig};

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let lambda: f64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1.0);
    let lr: f64 = std::env::args()
        .nth(3)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.2);
    let batch: usize = std::env::args()
        .nth(4)
        .and_then(|s| s.parse().ok())
        .unwrap_or(16);
    let epochs: usize = std::env::args()
        .nth(5)
        .and_then(|s| s.parse().ok())
        .unwrap_or(40);

    let dataset = gen_synthetic(seed, 240, 8, 0.5, true).expect("valid parameters");
    let (train_set, test_set) = split_kfold(&dataset, 5, 0, seed).expect("valid split");

    let mut columns = Vec::new();
    for mode in LossMode::ALL {
        let config = TrainConfig {
            loss_mode: mode,
            lambda_mono: lambda,
            soft_rank: SoftRankConfig::default(),
            batch_size: batch,
            epochs,
            learning_rate: lr,
            seed,
            retention_epochs: 1,
            hidden_dim: 8,
        };
        let outcome = train(&train_set, &test_set, &config).expect("training succeeds");
        columns.push(outcome.metrics);
    }

    println!("epoch,mse_only,mse_plus_mono,mse_plus_mono_bank");
    for e in 0..columns[0].len() {
        println!(
            "{},{:.4},{:.4},{:.4}",
            e, columns[0][e].test_srocc, columns[1][e].test_srocc, columns[2][e].test_srocc
        );
    }
    eprintln!(
        "train_loss last: mse={:.4} mono={:.4} bank={:.4}",
        columns[0].last().unwrap().train_loss,
        columns[1].last().unwrap().train_loss,
        columns[2].last().unwrap().train_loss
    );
}
