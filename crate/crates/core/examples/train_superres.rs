//! Trains a ×3 model on a small slice of the bundled MNIST digits and reports
//! test metrics against the constant mean-image baseline.
//!
//! cargo run --release --example train_superres -- [n_train] [n_test] [epochs]

use std::path::Path;
use std::time::Instant;

use ano_vqc::data::{build_sr_dataset, parse_idx_images, parse_idx_labels, read_maybe_gzip};
use ano_vqc::train::{self, TrainConfig};
use ano_vqc::{ModelConfig, Result};

fn load(prefix: &str, scale: usize, limit: usize) -> Result<Vec<ano_vqc::SrSample>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/mnist-subset");
    let images = parse_idx_images(&read_maybe_gzip(
        &dir.join(format!("{prefix}-images-idx3-ubyte.gz")),
    )?)?;
    let labels = parse_idx_labels(&read_maybe_gzip(
        &dir.join(format!("{prefix}-labels-idx1-ubyte.gz")),
    )?)?;
    build_sr_dataset(&images, &labels, scale, Some(limit), 0)
}

fn main() -> Result<()> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let n_train = args.first().copied().unwrap_or(64);
    let n_test = args.get(1).copied().unwrap_or(32);
    let epochs = args.get(2).copied().unwrap_or(10);

    let train_set = load("train", 3, n_train)?;
    let test_set = load("t10k", 3, n_test)?;
    let config = TrainConfig {
        epochs,
        batch_size: 16,
        learning_rate: 0.05,
        ..TrainConfig::default()
    };
    let model = train::init_model(ModelConfig::for_scale(3, 2, 4), &config)?;
    println!(
        "{} parameters, {} train / {} test samples",
        model.n_params(),
        train_set.len(),
        test_set.len()
    );

    let start = Instant::now();
    let (model, logs) = train::fit(model, &train_set, Some(&test_set), &config)?;
    for log in &logs {
        let val = log.val.as_ref().map(|v| v.mse).unwrap_or(f64::NAN);
        println!(
            "epoch {:3}  train {:.5}  test mse {:.5}",
            log.epoch, log.train_loss, val
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "{:.2} s total, {:.1} ms per sample-epoch",
        elapsed,
        1e3 * elapsed / (epochs * n_train) as f64
    );

    let report = train::evaluate(&model, &test_set)?;
    let baseline = train::mean_image_baseline(&train_set, &test_set)?;
    println!(
        "test mse {:.5} (mean-image baseline {:.5}), psnr {:.2} dB, ssim {:.4}",
        report.mse, baseline, report.psnr, report.ssim
    );
    Ok(())
}
