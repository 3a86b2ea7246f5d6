//! Independent reference implementations shared by the integration tests.
//! Everything here is built from dense matrices or direct loops, never from the
//! library's partial-trace or adjoint code paths.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use ano_vqc::data::{build_sr_dataset, parse_idx_images, parse_idx_labels, read_maybe_gzip};
use ano_vqc::{Axis, HermitianParams, ModelConfig, SrSample, StateVector};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub type C = Complex64;
pub type CMat = DMatrix<C>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Directory holding the bundled MNIST subset (1500 train / 500 test digits).
/// `ANO_VQC_MNIST_DIR` points the tests at a different copy with the same file names.
pub fn mnist_dir() -> PathBuf {
    std::env::var_os("ANO_VQC_MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/mnist-subset"))
}

pub fn mnist_files(split: &str) -> (PathBuf, PathBuf) {
    let dir = mnist_dir();
    (
        dir.join(format!("{split}-images-idx3-ubyte.gz")),
        dir.join(format!("{split}-labels-idx1-ubyte.gz")),
    )
}

pub fn mnist_samples(split: &str, scale: usize, limit: usize, seed: u64) -> Vec<SrSample> {
    let (img, lbl) = mnist_files(split);
    let images = parse_idx_images(&read_maybe_gzip(&img).unwrap()).unwrap();
    let labels = parse_idx_labels(&read_maybe_gzip(&lbl).unwrap()).unwrap();
    build_sr_dataset(&images, &labels, scale, Some(limit), seed).unwrap()
}

pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> StateVector {
    let amps: Vec<C> = (0..1usize << n)
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

pub fn random_params<R: Rng>(k: usize, std: f64, rng: &mut R) -> HermitianParams {
    let flat: Vec<f64> = (0..1usize << (2 * k))
        .map(|_| std * Distribution::<f64>::sample(&StandardNormal, rng))
        .collect();
    HermitianParams::from_flat(k, &flat).unwrap()
}

/// `k` distinct qubits out of `n` in random order.
pub fn random_subset<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    rand::seq::index::sample(rng, n, k).into_vec()
}

/// The K×K matrix written out entry by entry from the packed parameters.
pub fn hermitian_oracle(p: &HermitianParams) -> CMat {
    let dim = p.dim();
    let mut m = CMat::zeros(dim, dim);
    let mut t = 0;
    for i in 0..dim {
        m[(i, i)] = c(p.diag()[i], 0.0);
        for j in i + 1..dim {
            m[(i, j)] = c(p.re_upper()[t], p.im_upper()[t]);
            m[(j, i)] = c(p.re_upper()[t], -p.im_upper()[t]);
            t += 1;
        }
    }
    m
}

/// `H ⊗ I` on the full register, with `subset[j]` carrying local bit `j`.
pub fn embed(h: &CMat, subset: &[usize], n: usize) -> CMat {
    let dim = 1usize << n;
    let mask: usize = subset.iter().map(|q| 1usize << q).sum();
    let local = |i: usize| -> usize {
        subset
            .iter()
            .enumerate()
            .map(|(j, &q)| ((i >> q) & 1) << j)
            .sum()
    };
    CMat::from_fn(dim, dim, |i, j| {
        if i & !mask == j & !mask {
            h[(local(i), local(j))]
        } else {
            c(0.0, 0.0)
        }
    })
}

pub fn column(state: &StateVector) -> CMat {
    CMat::from_column_slice(state.dim(), 1, state.amplitudes())
}

/// `<psi|M|psi>` as a complex number.
pub fn sandwich(psi: &CMat, m: &CMat) -> C {
    (psi.adjoint() * m * psi)[(0, 0)]
}

/// Single-qubit gate `g` on wire `q`: kron ordered most-significant wire first.
pub fn single(g: &CMat, q: usize, n: usize) -> CMat {
    let mut out = CMat::identity(1, 1);
    for w in (0..n).rev() {
        let f = if w == q {
            g.clone()
        } else {
            CMat::identity(2, 2)
        };
        out = out.kronecker(&f);
    }
    out
}

pub fn cnot_matrix(control: usize, target: usize, n: usize) -> CMat {
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    for i in 0..dim {
        let j = if i >> control & 1 == 1 {
            i ^ (1 << target)
        } else {
            i
        };
        m[(j, i)] = c(1.0, 0.0);
    }
    m
}

pub fn hadamard() -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

/// `exp(-i a σ/2)` written out in closed form.
pub fn rotation(axis: Axis, a: f64) -> CMat {
    let (s, co) = (0.5 * a).sin_cos();
    let v = match axis {
        Axis::X => [c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)],
        Axis::Y => [c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)],
        Axis::Z => [c(co, -s), c(0.0, 0.0), c(0.0, 0.0), c(co, s)],
    };
    CMat::from_row_slice(2, 2, &v)
}

/// Full `U(θ)V(x)` as a dense 2^n unitary, built gate by gate.
pub fn circuit_unitary(cfg: &ModelConfig, theta: &[f64], x: &[f64]) -> CMat {
    let n = cfg.n_qubits;
    let mut u = CMat::identity(1 << n, 1 << n);
    for (q, &xq) in x.iter().enumerate().take(n) {
        u = single(&hadamard(), q, n) * u;
        u = single(&rotation(cfg.encoding_axes[q], cfg.angle_scale * xq), q, n) * u;
    }
    for l in 0..cfg.layers {
        for q in (0..n.saturating_sub(1)).step_by(2) {
            u = cnot_matrix(q, q + 1, n) * u;
        }
        for q in (1..n.saturating_sub(1)).step_by(2) {
            u = cnot_matrix(q, q + 1, n) * u;
        }
        for q in 0..n {
            u = single(&rotation(Axis::Y, theta[q * cfg.layers + l]), q, n) * u;
        }
    }
    u
}

/// Textbook `<0|V†U†(H⊗I)UV|0>` for every head of `model`.
pub fn forward_oracle(model: &ano_vqc::AnoVqcModel, x: &[f64]) -> Vec<f64> {
    let cfg = model.config();
    let n = cfg.n_qubits;
    let mut zero = CMat::zeros(1 << n, 1);
    zero[(0, 0)] = c(1.0, 0.0);
    let psi = circuit_unitary(cfg, model.theta(), x) * zero;
    model
        .heads()
        .iter()
        .map(|h| sandwich(&psi, &embed(&hermitian_oracle(&h.params), &h.subset, n)).re)
        .collect()
}

/// Direct-loop MSE.
pub fn mse_oracle(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s / a.len() as f64
}

/// Single-scale SSIM written as an explicit double loop over window positions.
pub fn ssim_oracle(a: &[f64], b: &[f64], h: usize, w: usize) -> f64 {
    let size = 7;
    let sigma: f64 = 1.5;
    let mut win = vec![vec![0.0; size]; size];
    let mut total = 0.0;
    for (u, row) in win.iter_mut().enumerate() {
        for (v, e) in row.iter_mut().enumerate() {
            let du = u as f64 - 3.0;
            let dv = v as f64 - 3.0;
            *e = (-(du * du + dv * dv) / (2.0 * sigma * sigma)).exp();
            total += *e;
        }
    }
    let c1 = 0.01f64.powi(2);
    let c2 = 0.03f64.powi(2);
    let mut sum = 0.0;
    let mut count = 0;
    for r in 0..=h - size {
        for col in 0..=w - size {
            let (mut mx, mut my, mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for u in 0..size {
                for v in 0..size {
                    let g = win[u][v] / total;
                    let x = a[(r + u) * w + col + v];
                    let y = b[(r + u) * w + col + v];
                    mx += g * x;
                    my += g * y;
                    xx += g * x * x;
                    yy += g * y * y;
                    xy += g * x * y;
                }
            }
            let vx = xx - mx * mx;
            let vy = yy - my * my;
            let cov = xy - mx * my;
            sum += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    sum / count as f64
}

/// Sobel gradient magnitude with replicate padding, by direct 3×3 convolution.
pub fn sobel_oracle(img: &[f64], h: usize, w: usize) -> Vec<f64> {
    let kx = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    let ky = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];
    let px = |r: isize, col: isize| -> f64 {
        let r = r.clamp(0, h as isize - 1) as usize;
        let col = col.clamp(0, w as isize - 1) as usize;
        img[r * w + col]
    };
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for col in 0..w {
            let (mut gx, mut gy) = (0.0, 0.0);
            for u in 0..3 {
                for v in 0..3 {
                    let p = px(r as isize + u as isize - 1, col as isize + v as isize - 1);
                    gx += kx[u][v] * p;
                    gy += ky[u][v] * p;
                }
            }
            out[r * w + col] = (gx * gx + gy * gy).sqrt();
        }
    }
    out
}

pub fn sobel_proxy_oracle(a: &[f64], b: &[f64], h: usize, w: usize) -> f64 {
    mse_oracle(&sobel_oracle(a, h, w), &sobel_oracle(b, h, w))
}

/// Box resampling by explicit interval intersection per output pixel.
pub fn resize_oracle(img: &[f64], h: usize, w: usize, oh: usize, ow: usize) -> Vec<f64> {
    let overlap = |lo: f64, hi: f64, i: usize| (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        let (r0, r1) = (
            r as f64 * h as f64 / oh as f64,
            (r + 1) as f64 * h as f64 / oh as f64,
        );
        for col in 0..ow {
            let (c0, c1) = (
                col as f64 * w as f64 / ow as f64,
                (col + 1) as f64 * w as f64 / ow as f64,
            );
            let mut acc = 0.0;
            for i in 0..h {
                for j in 0..w {
                    acc += overlap(r0, r1, i) * overlap(c0, c1, j) * img[i * w + j];
                }
            }
            out[r * ow + col] = acc / ((r1 - r0) * (c1 - c0));
        }
    }
    out
}
