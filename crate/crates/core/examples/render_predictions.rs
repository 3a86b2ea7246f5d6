//! Trains a small model briefly, then writes LR, prediction and HR images as
//! PGM files next to a per-image metric table.
//!
//! cargo run --release --example render_predictions -- [out_dir] [epochs]

use std::path::{Path, PathBuf};

use ano_vqc::data::{build_sr_dataset, parse_idx_images, parse_idx_labels, read_maybe_gzip};
use ano_vqc::image::write_pgm;
use ano_vqc::train::{self, TrainConfig};
use ano_vqc::{ImageView, MetricReport, ModelConfig, Result, SrSample};

fn load(prefix: &str, limit: usize) -> Result<Vec<SrSample>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/mnist-subset");
    let images = parse_idx_images(&read_maybe_gzip(
        &dir.join(format!("{prefix}-images-idx3-ubyte.gz")),
    )?)?;
    let labels = parse_idx_labels(&read_maybe_gzip(
        &dir.join(format!("{prefix}-labels-idx1-ubyte.gz")),
    )?)?;
    build_sr_dataset(&images, &labels, 4, Some(limit), 0)
}

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = PathBuf::from(
        args.first()
            .map(String::as_str)
            .unwrap_or("target/sr-render"),
    );
    let epochs = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(8);
    let train_set = load("train", 64)?;
    let test_set = load("t10k", 6)?;

    let config = TrainConfig {
        epochs,
        batch_size: 16,
        learning_rate: 0.03,
        ..TrainConfig::default()
    };
    let model = train::init_model(ModelConfig::for_scale(4, 2, 4), &config)?;
    let (model, logs) = train::fit(model, &train_set, Some(&test_set), &config)?;
    for l in &logs {
        println!("{}", l.csv_row());
    }

    std::fs::create_dir_all(&out).map_err(|e| ano_vqc::Error::io(&out, e))?;
    println!("image,label,mse,psnr,ssim");
    for (i, s) in test_set.iter().enumerate() {
        let pred = model.forward(s.lr.pixels())?;
        let view = ImageView::new(16, 16, &pred)?;
        let r = MetricReport::between(view, s.hr.view())?;
        println!("{i},{},{:.5},{:.2},{:.4}", s.label, r.mse, r.psnr, r.ssim);
        write_pgm(&out.join(format!("{i}_lr.pgm")), s.lr.view())?;
        write_pgm(&out.join(format!("{i}_pred.pgm")), view)?;
        write_pgm(&out.join(format!("{i}_hr.pgm")), s.hr.view())?;
    }
    println!("images in {}", out.display());
    Ok(())
}
