mod common;

use ano_vqc::image::{decode_pgm, encode_pgm, quantize};
use ano_vqc::metrics::{mse, perceptual_proxy, psnr, psnr_from_mse, ssim, MetricReport};
use ano_vqc::{GrayImage, ImageView};
use common::{mse_oracle, sobel_proxy_oracle, ssim_oracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_image(rng: &mut ChaCha8Rng, h: usize, w: usize) -> GrayImage {
    GrayImage::new(h, w, (0..h * w).map(|_| rng.random()).collect()).unwrap()
}

/// A 12×12 digit-like pattern and a smoothed, shifted copy of it.
fn fixed_pair() -> (Vec<f64>, Vec<f64>) {
    let a: Vec<f64> = (0..144)
        .map(|i| {
            let (r, c) = ((i / 12) as f64 - 5.5, (i % 12) as f64 - 5.5);
            let d = (r * r + c * c).sqrt();
            (1.0 - (d - 3.5).abs() / 2.0).clamp(0.0, 1.0)
        })
        .collect();
    let b: Vec<f64> = (0..144)
        .map(|i| {
            let (r, c) = (i / 12, i % 12);
            let n = a[r * 12 + (c + 1).min(11)];
            (0.6 * a[i] + 0.3 * n + 0.05 * ((r * c) % 3) as f64).clamp(0.0, 1.0)
        })
        .collect();
    (a, b)
}

fn view(px: &[f64], h: usize, w: usize) -> ImageView<'_> {
    ImageView::new(h, w, px).unwrap()
}

#[test]
fn ssim_matches_direct_convolution_oracle() {
    let (a, b) = fixed_pair();
    let got = ssim(view(&a, 12, 12), view(&b, 12, 12)).unwrap();
    let want = ssim_oracle(&a, &b, 12, 12);
    assert!((got - want).abs() <= 1e-9, "{got} vs {want}");
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for (h, w) in [(7, 7), (16, 16), (20, 13)] {
        let x = random_image(&mut rng, h, w);
        let y = random_image(&mut rng, h, w);
        let got = ssim(x.view(), y.view()).unwrap();
        assert!((got - ssim_oracle(x.pixels(), y.pixels(), h, w)).abs() <= 1e-9);
    }
}

#[test]
fn ssim_examples() {
    let (a, _) = fixed_pair();
    assert_eq!(ssim(view(&a, 12, 12), view(&a, 12, 12)).unwrap(), 1.0);
    let neg: Vec<f64> = a.iter().map(|v| 1.0 - v).collect();
    assert!(ssim(view(&a, 12, 12), view(&neg, 12, 12)).unwrap() < 0.0);
    let small = vec![0.5; 36];
    assert!(ssim(view(&small, 6, 6), view(&small, 6, 6)).is_err());
}

#[test]
fn mse_and_psnr() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let x = random_image(&mut rng, 9, 11);
    let y = random_image(&mut rng, 9, 11);
    assert!((mse(x.view(), y.view()).unwrap() - mse_oracle(x.pixels(), y.pixels())).abs() <= 1e-12);
    let zeros = GrayImage::filled(4, 4, 0.0).unwrap();
    let ones = GrayImage::filled(4, 4, 1.0).unwrap();
    assert_eq!(mse(zeros.view(), ones.view()).unwrap(), 1.0);
    assert_eq!(mse(x.view(), x.view()).unwrap(), 0.0);
    assert!((psnr_from_mse(0.01, 1.0) - 20.0).abs() < 1e-12);
    assert_eq!(psnr_from_mse(1.0, 1.0), 0.0);
    assert_eq!(psnr(x.view(), x.view(), 1.0).unwrap(), f64::INFINITY);
    assert!(mse(x.view(), zeros.view()).is_err());
}

#[test]
fn psnr_decreases_as_mse_grows() {
    let sweep: Vec<f64> = (1..200).map(|i| i as f64 * 0.005).collect();
    for pair in sweep.windows(2) {
        assert!(psnr_from_mse(pair[1], 1.0) < psnr_from_mse(pair[0], 1.0));
    }
}

#[test]
fn sobel_proxy_matches_oracle() {
    let edge: Vec<f64> = (0..64)
        .map(|i| if i % 8 >= 4 { 1.0 } else { 0.0 })
        .collect();
    let flat = vec![0.5; 64];
    let got = perceptual_proxy(view(&edge, 8, 8), view(&flat, 8, 8)).unwrap();
    assert!(got > 0.0);
    assert!((got - sobel_proxy_oracle(&edge, &flat, 8, 8)).abs() <= 1e-9);
    let (a, b) = fixed_pair();
    let got = perceptual_proxy(view(&a, 12, 12), view(&b, 12, 12)).unwrap();
    assert!((got - sobel_proxy_oracle(&a, &b, 12, 12)).abs() <= 1e-9);
    let c1 = vec![0.2; 25];
    let c2 = vec![0.9; 25];
    assert!(perceptual_proxy(view(&c1, 5, 5), view(&c2, 5, 5)).unwrap() <= 1e-28);
}

#[test]
fn metrics_are_symmetric_and_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..50 {
        let (h, w) = (rng.random_range(7..21), rng.random_range(7..21));
        let x = random_image(&mut rng, h, w);
        let y = random_image(&mut rng, h, w);
        let xy = MetricReport::between(x.view(), y.view()).unwrap();
        let yx = MetricReport::between(y.view(), x.view()).unwrap();
        assert!((xy.mse - yx.mse).abs() <= 1e-12);
        assert!((xy.psnr - yx.psnr).abs() <= 1e-12);
        assert!((xy.ssim - yx.ssim).abs() <= 1e-12);
        assert!((xy.perceptual - yx.perceptual).abs() <= 1e-12);
        assert!(xy.mse >= 0.0 && xy.ssim <= 1.0 && xy.perceptual >= 0.0);
        let same = MetricReport::between(x.view(), x.view()).unwrap();
        assert_eq!(same.ssim, 1.0);
        assert_eq!(same.psnr, f64::INFINITY);
    }
}

#[test]
fn pgm_quantization_and_round_trip() {
    assert_eq!(quantize(0.5), 128);
    assert_eq!(quantize(1.7), 255);
    assert_eq!(quantize(-0.2), 0);
    assert_eq!(quantize(1.0), 255);
    let img = GrayImage::new(2, 3, vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]).unwrap();
    let bytes = encode_pgm(img.view());
    assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
    assert_eq!(&bytes[bytes.len() - 6..], &[0, 51, 102, 153, 204, 255]);
    assert_eq!(decode_pgm(&bytes).unwrap(), img);
}
