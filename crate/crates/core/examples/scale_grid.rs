//! Trains one model per (k, scale) pair under a shared config and prints the
//! evaluation CSV, for comparing 2-local against 3-local readout across ×3, ×4, ×5.
//!
//! cargo run --release --example scale_grid -- [n_train] [n_test] [epochs] [learning_rate] [batch]

use std::path::Path;
use std::time::Instant;

use ano_vqc::data::{build_sr_dataset, parse_idx_images, parse_idx_labels, read_maybe_gzip};
use ano_vqc::metrics::{report_csv_row, REPORT_CSV_HEADER};
use ano_vqc::train::{self, TrainConfig};
use ano_vqc::{GrayImage, ModelConfig, Result};

fn load(prefix: &str) -> Result<(Vec<GrayImage>, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/mnist-subset");
    Ok((
        parse_idx_images(&read_maybe_gzip(
            &dir.join(format!("{prefix}-images-idx3-ubyte.gz")),
        )?)?,
        parse_idx_labels(&read_maybe_gzip(
            &dir.join(format!("{prefix}-labels-idx1-ubyte.gz")),
        )?)?,
    ))
}

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: f64| args.get(i).and_then(|a| a.parse().ok()).unwrap_or(default);
    let n_train = arg(0, 64.0) as usize;
    let n_test = arg(1, 32.0) as usize;
    let config = TrainConfig {
        epochs: arg(2, 10.0) as usize,
        learning_rate: arg(3, 0.02),
        batch_size: arg(4, 16.0) as usize,
        ..TrainConfig::default()
    };

    let (train_img, train_lbl) = load("train")?;
    let (test_img, test_lbl) = load("t10k")?;
    println!("{REPORT_CSV_HEADER},train_loss,seconds");
    for k in [2, 3] {
        for scale in [3, 4, 5] {
            let start = Instant::now();
            let train_set = build_sr_dataset(&train_img, &train_lbl, scale, Some(n_train), 0)?;
            let test_set = build_sr_dataset(&test_img, &test_lbl, scale, Some(n_test), 0)?;
            let model = train::init_model(ModelConfig::for_scale(scale, k, 4), &config)?;
            let (model, logs) = train::fit(model, &train_set, None, &config)?;
            let report = train::evaluate(&model, &test_set)?;
            let last = logs.last().map(|l| l.train_loss).unwrap_or(f64::NAN);
            println!(
                "{},{last:.6},{:.1}",
                report_csv_row(scale, k, &report),
                start.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}
