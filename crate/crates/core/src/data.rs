//! MNIST IDX parsing and LR/HR pair construction.
//!
//! Both LR inputs and HR targets are area-resampled from the original 28×28
//! digit: LR is always 4×4, HR is `4·scale` square.

use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::GrayImage;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

pub const MNIST_SIDE: usize = 28;
pub const LR_SIDE: usize = 4;
pub const SCALES: [usize; 3] = [3, 4, 5];

#[derive(Debug, Clone, PartialEq)]
pub struct SrSample {
    pub lr: GrayImage,
    pub hr: GrayImage,
    pub source_index: usize,
    pub label: u8,
}

/// Reads a file, transparently inflating gzip (magic `1f 8b`).
pub fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::format(0, format!("{}: bad gzip stream: {e}", path.display())))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::format(bytes.len(), format!("truncated header: missing {what}")))
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<()> {
    let magic = be_u32(bytes, 0, "magic number")?;
    if magic != expected {
        return Err(Error::format(
            0,
            format!("expected magic 0x{expected:08x}, found 0x{magic:08x}"),
        ));
    }
    Ok(())
}

fn check_payload(bytes: &[u8], header: usize, expected: usize) -> Result<()> {
    let found = bytes.len() - header;
    if found < expected {
        return Err(Error::format(
            bytes.len(),
            format!("truncated payload: expected {expected} bytes, found {found}"),
        ));
    }
    if found > expected {
        return Err(Error::format(
            header + expected,
            format!("{} trailing bytes after payload", found - expected),
        ));
    }
    Ok(())
}

/// Parses an IDX3 image file; pixels are normalized to `[0, 1]` by `/255`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<GrayImage>> {
    check_magic(bytes, IDX_IMAGES_MAGIC)?;
    let count = be_u32(bytes, 4, "image count")? as usize;
    let rows = be_u32(bytes, 8, "row count")? as usize;
    let cols = be_u32(bytes, 12, "column count")? as usize;
    if count > 0 && (rows == 0 || cols == 0) {
        return Err(Error::format(8, format!("image dimensions {rows}×{cols}")));
    }
    let size = rows
        .checked_mul(cols)
        .and_then(|s| s.checked_mul(count))
        .ok_or_else(|| Error::format(4, "image count overflows"))?;
    check_payload(bytes, 16, size)?;
    bytes[16..]
        .chunks_exact(rows * cols.max(1))
        .take(count)
        .map(|px| {
            GrayImage::new(
                rows,
                cols,
                px.iter().map(|&b| f64::from(b) / 255.0).collect(),
            )
        })
        .collect()
}

/// Parses an IDX1 label file; every label must be a digit.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, IDX_LABELS_MAGIC)?;
    let count = be_u32(bytes, 4, "label count")? as usize;
    check_payload(bytes, 8, count)?;
    let labels = &bytes[8..];
    if let Some(pos) = labels.iter().position(|&l| l > 9) {
        return Err(Error::format(
            8 + pos,
            format!("label {} is not a digit", labels[pos]),
        ));
    }
    Ok(labels.to_vec())
}

/// Serializes images as IDX3, quantizing pixels with `round(v·255)`.
pub fn encode_idx_images(images: &[GrayImage]) -> Result<Vec<u8>> {
    let (rows, cols) = images
        .first()
        .map(|i| (i.height(), i.width()))
        .unwrap_or((MNIST_SIDE, MNIST_SIDE));
    if images
        .iter()
        .any(|i| (i.height(), i.width()) != (rows, cols))
    {
        return Err(Error::input("IDX images must share dimensions"));
    }
    let mut out = Vec::with_capacity(16 + images.len() * rows * cols);
    for v in [
        IDX_IMAGES_MAGIC,
        images.len() as u32,
        rows as u32,
        cols as u32,
    ] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    for img in images {
        out.extend(img.pixels().iter().map(|&v| crate::image::quantize(v)));
    }
    Ok(out)
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Overlap weights of an `n_in → n_out` box resampling along one axis,
/// as `(input index, weight)` lists per output index. Weights sum to 1.
fn axis_weights(n_in: usize, n_out: usize) -> Vec<Vec<(usize, f64)>> {
    let ratio = n_in as f64 / n_out as f64;
    (0..n_out)
        .map(|o| {
            // interval [o·n_in/n_out, (o+1)·n_in/n_out) in input units
            let lo = (o * n_in) as f64 / n_out as f64;
            let hi = ((o + 1) * n_in) as f64 / n_out as f64;
            let first = (o * n_in) / n_out;
            let last = (((o + 1) * n_in).div_ceil(n_out)).min(n_in);
            (first..last)
                .filter_map(|i| {
                    let overlap = hi.min((i + 1) as f64) - lo.max(i as f64);
                    (overlap > 0.0).then_some((i, overlap / ratio))
                })
                .collect()
        })
        .collect()
}

/// Area-weighted (box filter) resampling to `out_h × out_w`.
pub fn resize_area(img: &GrayImage, out_h: usize, out_w: usize) -> Result<GrayImage> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::input(format!("output size {out_h}×{out_w}")));
    }
    let rows = axis_weights(img.height(), out_h);
    let cols = axis_weights(img.width(), out_w);
    let mut px = Vec::with_capacity(out_h * out_w);
    for rw in &rows {
        for cw in &cols {
            let mut acc = 0.0;
            for &(r, wr) in rw {
                for &(c, wc) in cw {
                    acc += wr * wc * img.get(r, c);
                }
            }
            px.push(acc.clamp(0.0, 1.0));
        }
    }
    GrayImage::new(out_h, out_w, px)
}

/// Builds `(4×4, 4·scale square)` pairs from 28×28 digits.
///
/// With `limit`, a seeded subset of source indices is kept, in ascending order.
pub fn build_sr_dataset(
    images: &[GrayImage],
    labels: &[u8],
    scale: usize,
    limit: Option<usize>,
    seed: u64,
) -> Result<Vec<SrSample>> {
    if !SCALES.contains(&scale) {
        return Err(Error::config(format!("scale {scale} not in {SCALES:?}")));
    }
    if images.len() != labels.len() {
        return Err(Error::config(format!(
            "{} images but {} labels",
            images.len(),
            labels.len()
        )));
    }
    if let Some(bad) = images
        .iter()
        .position(|i| (i.height(), i.width()) != (MNIST_SIDE, MNIST_SIDE))
    {
        return Err(Error::config(format!(
            "image {bad} is {}×{}, expected {MNIST_SIDE}×{MNIST_SIDE}",
            images[bad].height(),
            images[bad].width()
        )));
    }
    let indices: Vec<usize> = match limit {
        Some(0) => return Err(Error::config("empty dataset: limit is 0")),
        Some(n) if n < images.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = rand::seq::index::sample(&mut rng, images.len(), n).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..images.len()).collect(),
    };
    if indices.is_empty() {
        return Err(Error::config("empty dataset"));
    }
    let hr_side = LR_SIDE * scale;
    indices
        .into_iter()
        .map(|i| {
            Ok(SrSample {
                lr: resize_area(&images[i], LR_SIDE, LR_SIDE)?,
                hr: resize_area(&images[i], hr_side, hr_side)?,
                source_index: i,
                label: labels[i],
            })
        })
        .collect()
}

const DATASET_MAGIC: &[u8; 8] = b"ANOSRDS\0";
const DATASET_VERSION: u32 = 1;

/// A packed list of SR samples at one scale.
///
/// Layout (little-endian): magic `ANOSRDS\0`, u32 version, u32 scale, u32 count,
/// u32 lr height/width, u32 hr height/width, then per sample a u32 source index,
/// a u8 label, LR pixels and HR pixels as f64.
#[derive(Debug, Clone, PartialEq)]
pub struct SrDataset {
    pub scale: usize,
    pub samples: Vec<SrSample>,
}

impl SrDataset {
    pub fn new(scale: usize, samples: Vec<SrSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::config("empty dataset"));
        }
        let hr = LR_SIDE * scale;
        for s in &samples {
            if (s.lr.height(), s.lr.width()) != (LR_SIDE, LR_SIDE)
                || (s.hr.height(), s.hr.width()) != (hr, hr)
            {
                return Err(Error::config(format!(
                    "sample {} does not match scale {scale}",
                    s.source_index
                )));
            }
        }
        Ok(Self { scale, samples })
    }

    pub fn hr_side(&self) -> usize {
        LR_SIDE * self.scale
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let hr = self.hr_side();
        let mut out = Vec::new();
        out.extend_from_slice(DATASET_MAGIC);
        for v in [
            DATASET_VERSION,
            self.scale as u32,
            self.samples.len() as u32,
            LR_SIDE as u32,
            LR_SIDE as u32,
            hr as u32,
            hr as u32,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for s in &self.samples {
            out.extend_from_slice(&(s.source_index as u32).to_le_bytes());
            out.push(s.label);
            for v in s.lr.pixels().iter().chain(s.hr.pixels()) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != DATASET_MAGIC {
            return Err(Error::format(0, "not a packed SR dataset (bad magic)"));
        }
        let version = r.u32()?;
        if version != DATASET_VERSION {
            return Err(Error::format(
                8,
                format!("unsupported dataset version {version}"),
            ));
        }
        let scale = r.u32()? as usize;
        let count = r.u32()? as usize;
        let dims = [r.u32()?, r.u32()?, r.u32()?, r.u32()?].map(|d| d as usize);
        let hr = LR_SIDE * scale;
        if !SCALES.contains(&scale) || dims != [LR_SIDE, LR_SIDE, hr, hr] {
            return Err(Error::format(
                12,
                format!("inconsistent scale {scale} / dims {dims:?}"),
            ));
        }
        let mut samples = Vec::with_capacity(count);
        for _ in 0..count {
            let source_index = r.u32()? as usize;
            let label = r.take(1)?[0];
            let lr = r.image(LR_SIDE)?;
            let hr = r.image(hr)?;
            samples.push(SrSample {
                lr,
                hr,
                source_index,
                label,
            });
        }
        if r.pos != bytes.len() {
            return Err(Error::format(r.pos, "trailing bytes after last sample"));
        }
        Self::new(scale, samples)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Format { offset, message } => Error::Format {
                offset,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let out = self
            .bytes
            .get(self.pos..self.pos + n)
            .ok_or_else(|| Error::format(self.bytes.len(), "unexpected end of dataset file"))?;
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn image(&mut self, side: usize) -> Result<GrayImage> {
        let at = self.pos;
        let px = self
            .take(8 * side * side)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        GrayImage::new(side, side, px).map_err(|e| Error::format(at, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(magic: u32, dims: &[u32]) -> Vec<u8> {
        let mut v = magic.to_be_bytes().to_vec();
        for d in dims {
            v.extend_from_slice(&d.to_be_bytes());
        }
        v
    }

    #[test]
    fn parse_two_by_two_fixture() {
        let mut bytes = header(IDX_IMAGES_MAGIC, &[1, 2, 2]);
        bytes.extend_from_slice(&[0, 255, 128, 64]);
        let imgs = parse_idx_images(&bytes).unwrap();
        assert_eq!(imgs.len(), 1);
        assert_eq!(imgs[0].pixels(), &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
    }

    #[test]
    fn image_parser_errors() {
        let label_magic = header(IDX_LABELS_MAGIC, &[1, 2, 2]);
        let err = parse_idx_images(&label_magic).unwrap_err();
        assert!(err.to_string().contains("0x00000803"), "{err}");
        assert!(matches!(parse_idx_images(&[]), Err(Error::Format { .. })));

        let mut short = header(IDX_IMAGES_MAGIC, &[2, 2, 2]);
        short.extend_from_slice(&[1, 2, 3, 4, 5]);
        assert!(matches!(
            parse_idx_images(&short),
            Err(Error::Format { .. })
        ));

        let mut long = header(IDX_IMAGES_MAGIC, &[1, 2, 2]);
        long.extend_from_slice(&[1, 2, 3, 4, 5]);
        assert!(matches!(
            parse_idx_images(&long),
            Err(Error::Format { offset: 20, .. })
        ));
    }

    #[test]
    fn label_parser() {
        let mut bytes = header(IDX_LABELS_MAGIC, &[1]);
        bytes.push(7);
        assert_eq!(parse_idx_labels(&bytes).unwrap(), vec![7]);

        let mut mismatch = header(IDX_LABELS_MAGIC, &[3]);
        mismatch.extend_from_slice(&[1, 2]);
        assert!(matches!(
            parse_idx_labels(&mismatch),
            Err(Error::Format { .. })
        ));

        let mut bad = header(IDX_LABELS_MAGIC, &[1]);
        bad.push(10);
        assert!(matches!(
            parse_idx_labels(&bad),
            Err(Error::Format { offset: 8, .. })
        ));
    }

    #[test]
    fn resize_constant_and_mean() {
        let img = GrayImage::filled(28, 28, 0.37).unwrap();
        let small = resize_area(&img, 4, 4).unwrap();
        assert!(small.pixels().iter().all(|v| (v - 0.37).abs() < 1e-15));

        let img = GrayImage::new(2, 2, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(resize_area(&img, 1, 1).unwrap().pixels(), &[0.5]);
    }

    #[test]
    fn axis_weights_sum_to_one() {
        for (n_in, n_out) in [(28, 12), (28, 4), (28, 20), (3, 7), (5, 5)] {
            for w in axis_weights(n_in, n_out) {
                let total: f64 = w.iter().map(|(_, v)| v).sum();
                assert!((total - 1.0).abs() < 1e-12, "{n_in}->{n_out}");
            }
        }
    }

    #[test]
    fn dataset_shapes() {
        let img = GrayImage::filled(28, 28, 0.6).unwrap();
        let images = vec![img; 3];
        let labels = [1, 2, 3];
        for scale in SCALES {
            let ds = build_sr_dataset(&images, &labels, scale, None, 0).unwrap();
            assert_eq!(ds.len(), 3);
            assert_eq!(ds[0].hr.height(), 4 * scale);
            assert!(ds[0].lr.pixels().iter().all(|v| (v - 0.6).abs() < 1e-12));
            assert!(ds[0].hr.pixels().iter().all(|v| (v - 0.6).abs() < 1e-12));
        }
        assert!(build_sr_dataset(&images, &labels, 2, None, 0).is_err());
        assert!(build_sr_dataset(&images, &labels[..2], 3, None, 0).is_err());
        assert!(matches!(
            build_sr_dataset(&images, &labels, 3, Some(0), 0),
            Err(Error::Config(_))
        ));
        let odd = vec![GrayImage::filled(27, 28, 0.0).unwrap()];
        assert!(matches!(
            build_sr_dataset(&odd, &[0], 3, None, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn seeded_subsample_is_stable() {
        let images: Vec<GrayImage> = (0..40)
            .map(|i| GrayImage::filled(28, 28, i as f64 / 40.0).unwrap())
            .collect();
        let labels: Vec<u8> = (0..40).map(|i| (i % 10) as u8).collect();
        let a = build_sr_dataset(&images, &labels, 5, Some(10), 42).unwrap();
        let b = build_sr_dataset(&images, &labels, 5, Some(10), 42).unwrap();
        let ia: Vec<usize> = a.iter().map(|s| s.source_index).collect();
        assert_eq!(ia, b.iter().map(|s| s.source_index).collect::<Vec<_>>());
        assert_eq!(ia.len(), 10);
        assert!(ia.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(a[3].label as usize, ia[3] % 10);
    }

    #[test]
    fn packed_dataset_round_trip_and_errors() {
        let images: Vec<GrayImage> = (0..2)
            .map(|i| {
                let px = (0..784)
                    .map(|p| ((p * (i + 3)) % 256) as f64 / 255.0)
                    .collect();
                GrayImage::new(28, 28, px).unwrap()
            })
            .collect();
        let samples = build_sr_dataset(&images, &[4, 9], 4, None, 0).unwrap();
        let ds = SrDataset::new(4, samples).unwrap();
        let bytes = ds.to_bytes();
        assert_eq!(SrDataset::from_bytes(&bytes).unwrap(), ds);

        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(matches!(
            SrDataset::from_bytes(&trailing),
            Err(Error::Format { .. })
        ));
        assert!(SrDataset::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(SrDataset::from_bytes(&magic).is_err());
        assert!(SrDataset::new(3, ds.samples.clone()).is_err());
        assert!(SrDataset::new(3, vec![]).is_err());
    }
}
