//! Image quality metrics: MSE, PSNR, SSIM and a Sobel-gradient perceptual proxy.
//!
//! The perceptual proxy stands in for a learned perceptual distance and is
//! reported under the name `lpips_proxy`; its values are not comparable to a
//! network-based LPIPS score.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::ImageView;

pub const SSIM_WINDOW: usize = 7;
pub const SSIM_SIGMA: f64 = 1.5;
pub const PIXEL_MAX: f64 = 1.0;

fn check_same_dims(a: &ImageView<'_>, b: &ImageView<'_>) -> Result<()> {
    if (a.height, a.width) != (b.height, b.width) {
        return Err(Error::input(format!(
            "image dimensions differ: {}×{} vs {}×{}",
            a.height, a.width, b.height, b.width
        )));
    }
    Ok(())
}

pub fn mse(a: ImageView<'_>, b: ImageView<'_>) -> Result<f64> {
    check_same_dims(&a, &b)?;
    let sum: f64 = a
        .pixels
        .iter()
        .zip(b.pixels)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.pixels.len() as f64)
}

/// `10·log10(max² / mse)`, `+inf` for `mse == 0`.
pub fn psnr_from_mse(mse: f64, max_value: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (max_value * max_value / mse).log10()
    }
}

pub fn psnr(a: ImageView<'_>, b: ImageView<'_>, max_value: f64) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?, max_value))
}

/// Normalized 7×7 Gaussian window, σ = 1.5.
fn gaussian_window() -> [[f64; SSIM_WINDOW]; SSIM_WINDOW] {
    let half = (SSIM_WINDOW / 2) as f64;
    let g: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let total: f64 = g.iter().sum();
    let mut w = [[0.0; SSIM_WINDOW]; SSIM_WINDOW];
    for (r, row) in w.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = g[r] * g[c] / (total * total);
        }
    }
    w
}

/// Mean SSIM over all fully-contained 7×7 windows.
pub fn ssim(a: ImageView<'_>, b: ImageView<'_>) -> Result<f64> {
    check_same_dims(&a, &b)?;
    if a.height < SSIM_WINDOW || a.width < SSIM_WINDOW {
        return Err(Error::input(format!(
            "SSIM needs at least {SSIM_WINDOW}×{SSIM_WINDOW} pixels, got {}×{}",
            a.height, a.width
        )));
    }
    let c1 = (0.01 * PIXEL_MAX).powi(2);
    let c2 = (0.03 * PIXEL_MAX).powi(2);
    let w = gaussian_window();
    let mut total = 0.0;
    let mut count = 0usize;
    for top in 0..=a.height - SSIM_WINDOW {
        for left in 0..=a.width - SSIM_WINDOW {
            let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (r, row) in w.iter().enumerate() {
                for (c, &wt) in row.iter().enumerate() {
                    let x = a.get(top + r, left + c);
                    let y = b.get(top + r, left + c);
                    ma += wt * x;
                    mb += wt * y;
                    saa += wt * (x * x);
                    sbb += wt * (y * y);
                    sab += wt * (x * y);
                }
            }
            let va = saa - ma * ma;
            let vb = sbb - mb * mb;
            let cov = sab - ma * mb;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    Ok(total / count as f64)
}

const SOBEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
const SOBEL_Y: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];

/// Horizontal and vertical Sobel responses with replicate padding.
fn sobel(img: &ImageView<'_>) -> (Vec<f64>, Vec<f64>) {
    let n = img.height * img.width;
    let mut gx = Vec::with_capacity(n);
    let mut gy = Vec::with_capacity(n);
    for r in 0..img.height as isize {
        for c in 0..img.width as isize {
            let (mut sx, mut sy) = (0.0, 0.0);
            for dr in 0..3 {
                for dc in 0..3 {
                    let v = img.get_clamped(r + dr as isize - 1, c + dc as isize - 1);
                    sx += SOBEL_X[dr][dc] * v;
                    sy += SOBEL_Y[dr][dc] * v;
                }
            }
            gx.push(sx);
            gy.push(sy);
        }
    }
    (gx, gy)
}

/// Sobel gradient magnitude `sqrt(gx² + gy²)` per pixel.
pub fn sobel_magnitude(img: ImageView<'_>) -> Vec<f64> {
    let (gx, gy) = sobel(&img);
    gx.iter().zip(&gy).map(|(x, y)| x.hypot(*y)).collect()
}

fn check_proxy_dims(a: &ImageView<'_>, b: &ImageView<'_>) -> Result<()> {
    check_same_dims(a, b)?;
    if a.height < 3 || a.width < 3 {
        return Err(Error::input("perceptual proxy needs at least 3×3 pixels"));
    }
    Ok(())
}

/// Mean squared difference of Sobel gradient magnitudes.
pub fn perceptual_proxy(a: ImageView<'_>, b: ImageView<'_>) -> Result<f64> {
    check_proxy_dims(&a, &b)?;
    let ma = sobel_magnitude(a);
    let mb = sobel_magnitude(b);
    Ok(ma
        .iter()
        .zip(&mb)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / ma.len() as f64)
}

/// [`perceptual_proxy`] together with its gradient with respect to `pred`.
/// Where the prediction's gradient magnitude is exactly zero the subgradient 0 is used.
pub fn perceptual_proxy_with_grad(
    pred: ImageView<'_>,
    target: ImageView<'_>,
) -> Result<(f64, Vec<f64>)> {
    check_proxy_dims(&pred, &target)?;
    let (gx, gy) = sobel(&pred);
    let mt = sobel_magnitude(target);
    let n = gx.len() as f64;
    let (h, w) = (pred.height as isize, pred.width as isize);
    let mut value = 0.0;
    let mut grad = vec![0.0; gx.len()];
    for r in 0..h {
        for c in 0..w {
            let i = (r * w + c) as usize;
            let mag = gx[i].hypot(gy[i]);
            let diff = mag - mt[i];
            value += diff * diff;
            if mag == 0.0 {
                continue;
            }
            let scale = 2.0 * diff / (n * mag);
            for dr in 0..3 {
                for dc in 0..3 {
                    let sr = (r + dr as isize - 1).clamp(0, h - 1);
                    let sc = (c + dc as isize - 1).clamp(0, w - 1);
                    grad[(sr * w + sc) as usize] +=
                        scale * (gx[i] * SOBEL_X[dr][dc] + gy[i] * SOBEL_Y[dr][dc]);
                }
            }
        }
    }
    Ok((value / n, grad))
}

/// One row of the evaluation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub mse: f64,
    pub psnr: f64,
    pub ssim: f64,
    /// Sobel-gradient proxy reported in the `lpips_proxy` column.
    pub perceptual: f64,
}

impl MetricReport {
    pub fn between(pred: ImageView<'_>, target: ImageView<'_>) -> Result<Self> {
        let mse = mse(pred, target)?;
        Ok(Self {
            mse,
            psnr: psnr_from_mse(mse, PIXEL_MAX),
            ssim: ssim(pred, target)?,
            perceptual: perceptual_proxy(pred, target)?,
        })
    }

    /// Averages MSE, SSIM and the proxy over images; PSNR is taken from the
    /// averaged MSE so that `mse == 0` exactly when PSNR is infinite.
    pub fn average(reports: &[MetricReport]) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::input("no images to average"));
        }
        let n = reports.len() as f64;
        let mse = reports.iter().map(|r| r.mse).sum::<f64>() / n;
        Ok(Self {
            mse,
            psnr: psnr_from_mse(mse, PIXEL_MAX),
            ssim: reports.iter().map(|r| r.ssim).sum::<f64>() / n,
            perceptual: reports.iter().map(|r| r.perceptual).sum::<f64>() / n,
        })
    }
}

/// Formats a float with 6 decimals; infinities as `inf`.
pub fn fmt_metric(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".to_string()
    } else {
        format!("{v:.6}")
    }
}

pub const REPORT_CSV_HEADER: &str = "scale,k_local,mse,lpips_proxy,psnr,ssim";

pub fn report_csv_row(scale: usize, k_local: usize, r: &MetricReport) -> String {
    format!(
        "{scale},{k_local},{},{},{},{}",
        fmt_metric(r.mse),
        fmt_metric(r.perceptual),
        fmt_metric(r.psnr),
        fmt_metric(r.ssim)
    )
}
