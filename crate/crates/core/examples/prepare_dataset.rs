//! Builds LR/HR pairs at every scale from the bundled MNIST subset, writes the
//! packed datasets, and prints one digit as ASCII at each resolution.
//!
//! cargo run --release --example prepare_dataset -- [out_dir] [limit]

use std::path::{Path, PathBuf};

use ano_vqc::data::{build_sr_dataset, parse_idx_images, parse_idx_labels, read_maybe_gzip};
use ano_vqc::{GrayImage, Result, SrDataset};

fn ascii(img: &GrayImage) {
    const SHADES: &[u8] = b" .:-=+*#%@";
    for r in 0..img.height() {
        let line: String = (0..img.width())
            .map(|c| SHADES[(img.get(r, c) * 9.0).round() as usize] as char)
            .flat_map(|ch| [ch, ch])
            .collect();
        println!("  {line}");
    }
}

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = PathBuf::from(args.first().map(String::as_str).unwrap_or("target/sr-data"));
    let limit = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(256);
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/mnist-subset");
    let images = parse_idx_images(&read_maybe_gzip(&dir.join("train-images-idx3-ubyte.gz"))?)?;
    let labels = parse_idx_labels(&read_maybe_gzip(&dir.join("train-labels-idx1-ubyte.gz"))?)?;
    println!("{} source digits", images.len());
    std::fs::create_dir_all(&out).map_err(|e| ano_vqc::Error::io(&out, e))?;

    for scale in [3, 4, 5] {
        let samples = build_sr_dataset(&images, &labels, scale, Some(limit), 0)?;
        let first = samples[0].clone();
        let ds = SrDataset::new(scale, samples)?;
        let path = out.join(format!("train_x{scale}.bin"));
        ds.write(&path)?;
        let side = ds.hr_side();
        println!(
            "x{scale}: {} samples, HR {side}x{side}, {}",
            ds.samples.len(),
            path.display()
        );
        if scale == 3 {
            println!(
                "digit {} (source {}), LR 4x4:",
                first.label, first.source_index
            );
            ascii(&first.lr);
        }
        println!("HR {}x{}:", first.hr.height(), first.hr.width());
        ascii(&first.hr);
    }
    Ok(())
}
